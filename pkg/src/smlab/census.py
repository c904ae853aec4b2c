"""Profile-space census.

Exhaustive mode walks all (n!)^(2n) profiles in a fixed order: a profile's
cursor is the mixed-radix number whose 2n digits are the lexicographic ranks
of its rows (men's rows first, most significant digit first).  Sampled mode
draws every row as an independent uniform permutation; sample i depends only
on (n, seed, i), so a sampled census can resume at any position.

Each visited profile is classified into one of the regions spanned by the
seven conditions, and a list of theorems is evaluated on it.  A violated
theorem keeps the lowest cursor at which it failed.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from . import kernels as K
from .conditions import DEFAULT_NCC_CEILING, REGION_ORDER
from .core import PreferenceProfile
from .errors import InstanceTooLarge
from .generators import gen_extremal, gen_fixture  # noqa: F401  (re-exported)
from .stability import brute_ceiling

EXHAUSTIVE_CEILING = 3
SAMPLE_CHUNK = 1024
BLOCK = 8192
STABLE_DEFAULT_MAX_N = 6


def permutation_table(n: int) -> np.ndarray:
    """All permutations of range(n) in lexicographic order, one per row."""
    return np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)


def profile_space_size(n: int) -> int:
    return math.factorial(n) ** (2 * n)


# ---------------------------------------------------------------------------
# profile streams


def _decode_block(n: int, start: int, stop: int, perms: np.ndarray) -> np.ndarray:
    base = perms.shape[0]
    idx = np.arange(start, stop, dtype=object if profile_space_size(n) >= 2**62 else np.int64)
    digits = np.empty((len(idx), 2 * n), dtype=np.int64)
    for r in range(2 * n - 1, -1, -1):
        digits[:, r] = (idx % base).astype(np.int64)
        idx = idx // base
    return perms[digits].reshape(-1, 2, n, n)


def _sample_chunk(n: int, seed: int, chunk: int) -> np.ndarray:
    rng = np.random.default_rng([seed, chunk])
    rows = np.tile(np.arange(n, dtype=np.int64), (SAMPLE_CHUNK * 2 * n, 1))
    return rng.permuted(rows, axis=1).reshape(SAMPLE_CHUNK, 2, n, n)


def _sample_block(n: int, seed: int, start: int, stop: int) -> np.ndarray:
    parts = []
    for chunk in range(start // SAMPLE_CHUNK, (stop - 1) // SAMPLE_CHUNK + 1):
        arr = _sample_chunk(n, seed, chunk)
        lo = max(start - chunk * SAMPLE_CHUNK, 0)
        hi = min(stop - chunk * SAMPLE_CHUNK, SAMPLE_CHUNK)
        parts.append(arr[lo:hi])
    return np.concatenate(parts) if parts else np.empty((0, 2, n, n), dtype=np.int64)


class ProfileIterator:
    """Restartable iterator over the exhaustive profile space."""

    def __init__(self, n: int, cursor: int = 0, *, allow_large: bool = False):
        if n < 1:
            raise ValueError("n must be positive")
        if n > EXHAUSTIVE_CEILING and not allow_large:
            raise InstanceTooLarge(n, EXHAUSTIVE_CEILING, "exhaustive enumeration")
        self.n = n
        self.cursor = cursor
        self.total = profile_space_size(n)
        self._perms = permutation_table(n)

    def __iter__(self) -> "ProfileIterator":
        return self

    def __next__(self) -> PreferenceProfile:
        if self.cursor >= self.total:
            raise StopIteration
        arr = _decode_block(self.n, self.cursor, self.cursor + 1, self._perms)[0]
        self.cursor += 1
        return PreferenceProfile.from_array(arr)

    def state(self) -> dict:
        return {"n": self.n, "cursor": self.cursor}

    @classmethod
    def from_state(cls, state: dict, *, allow_large: bool = False) -> "ProfileIterator":
        return cls(state["n"], state["cursor"], allow_large=allow_large)


def enumerate_profiles(n: int, *, allow_large: bool = False) -> ProfileIterator:
    return ProfileIterator(n, allow_large=allow_large)


def sample_profiles(n: int, count: int, seed: int) -> Iterator[PreferenceProfile]:
    if count < 1:
        raise ValueError("count must be at least 1")
    if n < 1:
        raise ValueError("n must be positive")
    for start in range(0, count, SAMPLE_CHUNK):
        for arr in _sample_block(n, seed, start, min(start + SAMPLE_CHUNK, count)):
            yield PreferenceProfile.from_array(arr)


def profile_at(n: int, mode: "CensusMode", cursor: int) -> PreferenceProfile:
    if mode.kind == "exhaustive":
        arr = _decode_block(n, cursor, cursor + 1, permutation_table(n))[0]
    else:
        arr = _sample_block(n, mode.seed, cursor, cursor + 1)[0]
    return PreferenceProfile.from_array(arr)


# ---------------------------------------------------------------------------
# theorem list


def _theorems(n: int, ncc: bool, stable: bool):
    """(id, premise, conclusion) builders over the kernel output columns."""
    mp_max, mr_max = n * n - n + 1, n * n - 2 * n + 2

    def f(name):
        return lambda i, b: b[:, K.FLAG[name]]

    def all_(i, b):
        return np.ones(len(b), dtype=bool)

    def m_full(i, b):
        return i[:, K.COL_M_PROPS] == mp_max

    def w_full(i, b):
        return i[:, K.COL_W_PROPS] == mp_max

    def implies(a, c):
        return ~a | c

    usm, spc, nccf = f("usm"), f("spc"), f("ncc")
    mmp, wmp, mmr, wmr = f("m_maxprop"), f("w_maxprop"), f("m_maxrou"), f("w_maxrou")

    out = [
        ("single-proposal-receiver", all_, f("single_proposal")),
        ("proposal-round-bounds", all_, lambda i, b: (i[:, 0] <= mp_max) & (i[:, 2] <= mp_max)
         & (i[:, 1] <= mr_max) & (i[:, 3] <= mr_max)),
        ("round-sizes-nonincreasing", all_, f("rounds_nonincreasing")),
        ("da-stability", all_, f("da_stable")),
        ("opposition-of-interests", lambda i, b: ~usm(i, b), f("opposition")),
        ("maxprop-characterization", all_, lambda i, b: (mmp(i, b) == m_full(i, b)) & (wmp(i, b) == w_full(i, b))),
        ("maxrou-characterization", all_, lambda i, b: (mmr(i, b) == (i[:, 1] == mr_max))
         & (wmr(i, b) == (i[:, 3] == mr_max))),
        ("maxrou-implies-maxprop", lambda i, b: mmr(i, b) | wmr(i, b),
         lambda i, b: implies(mmr(i, b), mmp(i, b)) & implies(wmr(i, b), wmp(i, b))),
        ("maxprop-implies-usm", lambda i, b: mmp(i, b) | wmp(i, b) | mmr(i, b) | wmr(i, b), usm),
        ("maximal-trace-structure", lambda i, b: m_full(i, b) | w_full(i, b),
         lambda i, b: implies(m_full(i, b), f("trace_m")(i, b)) & implies(w_full(i, b), f("trace_w")(i, b))),
        ("maxprop-necessary-structure", lambda i, b: m_full(i, b) | w_full(i, b),
         lambda i, b: implies(m_full(i, b), f("struct_m")(i, b)) & implies(w_full(i, b), f("struct_w")(i, b))),
    ]
    if stable:
        out.append(("usm-oracle-agreement", all_, lambda i, b: usm(i, b) == (i[:, K.COL_STABLE] == 1)))
    if ncc:
        out.append(("ncc-implies-spc", nccf, spc))
    if n >= 3:
        out.append(("spc-maxprop-disjoint", spc, lambda i, b: ~mmp(i, b) & ~wmp(i, b)))
        out.append(("men-women-maxprop-disjoint", mmp, lambda i, b: ~wmp(i, b)))
    if n == 3:
        out.append(("n3-maxprop-equals-maxrou", all_,
                    lambda i, b: (mmp(i, b) == mmr(i, b)) & (wmp(i, b) == wmr(i, b))))
    if n == 2:
        out.append(("n2-maxprop-equals-maxrou", all_,
                    lambda i, b: (mmp(i, b) == mmr(i, b)) & (wmp(i, b) == wmr(i, b))))
        if ncc:
            out.append(("n2-spc-equals-ncc", all_, lambda i, b: spc(i, b) == nccf(i, b)))
        out.append(("n2-spc-equals-usm", all_, lambda i, b: spc(i, b) == usm(i, b)))
        out.append(("n2-maxprop-implies-spc", lambda i, b: mmp(i, b) | wmp(i, b), spc))
        out.append(("n2-top-preference-characterization", all_, lambda i, b:
                    (mmp(i, b) == f("men_share_top")(i, b))
                    & (wmp(i, b) == f("women_share_top")(i, b))
                    & ((mmp(i, b) & wmp(i, b)) == (f("men_share_top")(i, b) & f("women_share_top")(i, b)))))
    return out


# ---------------------------------------------------------------------------
# census state


@dataclass(frozen=True)
class CensusMode:
    kind: str  # "exhaustive" or "sampled"
    count: int | None = None
    seed: int | None = None

    @classmethod
    def exhaustive(cls) -> "CensusMode":
        return cls("exhaustive")

    @classmethod
    def sampled(cls, count: int, seed: int) -> "CensusMode":
        if count < 1:
            raise ValueError("sample count must be at least 1")
        if seed < 0:
            raise ValueError("seed must be non-negative")
        return cls("sampled", count, seed)

    def to_json(self) -> dict:
        if self.kind == "exhaustive":
            return {"kind": "exhaustive"}
        return {"kind": "sampled", "count": self.count, "seed": self.seed}

    @classmethod
    def from_json(cls, data: dict) -> "CensusMode":
        if data["kind"] == "exhaustive":
            return cls.exhaustive()
        return cls.sampled(data["count"], data["seed"])


@dataclass
class TheoremTally:
    instances: int = 0
    violations: int = 0
    first_violation: int | None = None

    def merge(self, other: "TheoremTally") -> None:
        self.instances += other.instances
        self.violations += other.violations
        if other.first_violation is not None and (
            self.first_violation is None or other.first_violation < self.first_violation
        ):
            self.first_violation = other.first_violation


@dataclass
class CensusState:
    """Everything needed to continue an interrupted census."""

    n: int
    mode: CensusMode
    ncc: bool
    stable: bool
    position: int = 0
    region_counts: dict[str, int] = field(default_factory=dict)
    theorems: dict[str, TheoremTally] = field(default_factory=dict)

    @property
    def target(self) -> int:
        return profile_space_size(self.n) if self.mode.kind == "exhaustive" else self.mode.count

    @property
    def done(self) -> bool:
        return self.position >= self.target

    def merge(self, block: "BlockResult") -> None:
        if block.start != self.position:
            raise ValueError("blocks must be merged in cursor order")
        for key, value in block.region_counts.items():
            self.region_counts[key] = self.region_counts.get(key, 0) + value
        for name, tally in block.theorems.items():
            self.theorems.setdefault(name, TheoremTally()).merge(tally)
        self.position = block.stop

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "mode": self.mode.to_json(),
            "ncc": self.ncc,
            "stable": self.stable,
            "position": self.position,
            "region_counts": dict(sorted(self.region_counts.items())),
            "theorems": {
                k: {"instances": t.instances, "violations": t.violations, "first_violation": t.first_violation}
                for k, t in sorted(self.theorems.items())
            },
        }

    @classmethod
    def from_json(cls, data: dict) -> "CensusState":
        return cls(
            n=data["n"],
            mode=CensusMode.from_json(data["mode"]),
            ncc=data["ncc"],
            stable=data["stable"],
            position=data["position"],
            region_counts=dict(data["region_counts"]),
            theorems={k: TheoremTally(**v) for k, v in data["theorems"].items()},
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "CensusState":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass
class BlockResult:
    start: int
    stop: int
    region_counts: dict[str, int]
    theorems: dict[str, TheoremTally]


def _region_keys(flags: np.ndarray, ncc: bool) -> np.ndarray:
    cols = [K.FLAG[c.value.replace("-", "_")] for c in REGION_ORDER]
    bits = flags[:, cols].astype(np.int64)
    codes = np.zeros(len(flags), dtype=np.int64)
    for b in range(bits.shape[1]):
        codes = codes * 2 + bits[:, b]
    return codes


def _code_to_key(code: int, ncc: bool) -> str:
    s = format(code, "07b")
    return s if ncc else s[:2] + "-" + s[3:]


def classify_block(n: int, mode: CensusMode, start: int, stop: int, ncc: bool, stable: bool) -> BlockResult:
    perms = permutation_table(n)
    if mode.kind == "exhaustive":
        profiles = _decode_block(n, start, stop, perms)
    else:
        profiles = _sample_block(n, mode.seed, start, stop)
    ints, flags = K.classify_batch(np.ascontiguousarray(profiles, dtype=np.int64), perms, ncc, stable)

    codes, counts = np.unique(_region_keys(flags, ncc), return_counts=True)
    regions = {_code_to_key(int(c), ncc): int(k) for c, k in zip(codes, counts)}

    theorems = {}
    for name, premise_fn, conclusion_fn in _theorems(n, ncc, stable):
        premise = premise_fn(ints, flags)
        bad = premise & ~conclusion_fn(ints, flags)
        hits = np.flatnonzero(bad)
        theorems[name] = TheoremTally(
            instances=int(premise.sum()),
            violations=int(len(hits)),
            first_violation=int(start + hits[0]) if len(hits) else None,
        )
    return BlockResult(start, stop, regions, theorems)


def _classify_block_args(args) -> BlockResult:
    return classify_block(*args)


# ---------------------------------------------------------------------------
# driver


@dataclass(frozen=True)
class CensusTable:
    n: int
    mode: CensusMode
    ncc: bool
    stable: bool
    total: int
    region_counts: dict[str, int]
    theorem_flags: dict[str, dict]

    @property
    def marginals(self) -> dict[str, int | None]:
        out = {}
        for pos, cond in enumerate(REGION_ORDER):
            if cond.value == "ncc" and not self.ncc:
                out[cond.value] = None
                continue
            out[cond.value] = sum(c for key, c in self.region_counts.items() if key[pos] == "1")
        return out

    @property
    def all_hold(self) -> bool:
        return all(flag["status"] == "holds" for flag in self.theorem_flags.values())

    def violations(self) -> dict[str, dict]:
        return {k: v for k, v in self.theorem_flags.items() if v["status"] != "holds"}

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "mode": self.mode.to_json(),
            "total": self.total,
            "conditions": [c.value for c in REGION_ORDER],
            "ncc": "computed" if self.ncc else "skipped",
            "stable_enumeration": "computed" if self.stable else "skipped",
            "region_counts": dict(sorted(self.region_counts.items())),
            "marginals": self.marginals,
            "theorems": dict(sorted(self.theorem_flags.items())),
        }

    def render_json(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"

    def render_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["region", "count"])
        for key, count in sorted(self.region_counts.items()):
            writer.writerow([key, count])
        return buf.getvalue()


def _finalize(state: CensusState) -> CensusTable:
    flags = {}
    for name, tally in sorted(state.theorems.items()):
        if tally.violations == 0:
            flags[name] = {"status": "holds", "instances": tally.instances}
        else:
            profile = profile_at(state.n, state.mode, tally.first_violation)
            flags[name] = {
                "status": "violated",
                "instances": tally.instances,
                "violations": tally.violations,
                "witness": {
                    "cursor": tally.first_violation,
                    "men": [[w + 1 for w in row] for row in profile.men],
                    "women": [[m + 1 for m in row] for row in profile.women],
                },
            }
    return CensusTable(
        n=state.n,
        mode=state.mode,
        ncc=state.ncc,
        stable=state.stable,
        total=state.position,
        region_counts=dict(state.region_counts),
        theorem_flags=flags,
    )


def new_state(
    n: int,
    mode: CensusMode,
    *,
    ncc: bool | None = None,
    stable: bool | None = None,
    allow_large: bool = False,
) -> CensusState:
    if n < 1:
        raise ValueError("n must be positive")
    if mode.kind == "exhaustive" and n > EXHAUSTIVE_CEILING and not allow_large:
        raise InstanceTooLarge(n, EXHAUSTIVE_CEILING, "exhaustive census")
    if ncc is None:
        ncc = n <= 3
    if ncc and n > DEFAULT_NCC_CEILING:
        raise InstanceTooLarge(n, DEFAULT_NCC_CEILING, "NCC search")
    if stable is None:
        stable = n <= min(STABLE_DEFAULT_MAX_N, brute_ceiling())
    if stable and n > brute_ceiling():
        raise InstanceTooLarge(n, brute_ceiling(), "stable-set enumeration")
    return CensusState(n, mode, ncc, stable)


def advance(
    state: CensusState,
    *,
    stop_after: int | None = None,
    workers: int = 1,
    checkpoint: str | Path | None = None,
    block: int = BLOCK,
) -> CensusState:
    """Process profiles from ``state.position`` onwards, mutating and returning ``state``."""
    end = state.target if stop_after is None else min(state.target, state.position + stop_after)
    bounds = [(s, min(s + block, end)) for s in range(state.position, end, block)]
    jobs = [(state.n, state.mode, a, b, state.ncc, state.stable) for a, b in bounds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for result in pool.map(_classify_block_args, jobs):
                state.merge(result)
                if checkpoint:
                    state.save(checkpoint)
    else:
        for job in jobs:
            state.merge(classify_block(*job))
            if checkpoint:
                state.save(checkpoint)
    return state


def run_census(
    n: int,
    mode: CensusMode | None = None,
    *,
    ncc: bool | None = None,
    stable: bool | None = None,
    workers: int = 1,
    allow_large: bool = False,
    resume: CensusState | None = None,
    checkpoint: str | Path | None = None,
) -> CensusTable:
    """Classify every profile of the census and evaluate the theorem list.

    ``ncc`` defaults to on for n <= 3; ``stable`` (brute-force stable-set
    enumeration) defaults to on for n <= 6.
    """
    if resume is not None:
        state = resume
    else:
        state = new_state(n, mode or CensusMode.exhaustive(), ncc=ncc, stable=stable, allow_large=allow_large)
    advance(state, workers=workers, checkpoint=checkpoint)
    return _finalize(state)


def finalize(state: CensusState) -> CensusTable:
    if not state.done:
        raise ValueError(f"census stopped at {state.position} of {state.target}")
    return _finalize(state)
