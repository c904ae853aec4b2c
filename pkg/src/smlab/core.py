"""Domain types: preference profiles, matchings, orderings.

All indices are 0-based in memory.  Profiles, matchings and orderings are
immutable once built, so they can be shared freely between workers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import DimensionMismatch, DuplicateEntry, OutOfRange, ProfileError, RowLengthMismatch


class Side(enum.Enum):
    MEN = "men"
    WOMEN = "women"

    @property
    def other(self) -> "Side":
        return Side.WOMEN if self is Side.MEN else Side.MEN

    @property
    def prefix(self) -> str:
        return "m" if self is Side.MEN else "w"

    @classmethod
    def parse(cls, value: "str | Side") -> "Side":
        if isinstance(value, Side):
            return value
        key = value.strip().lower()
        if key in ("men", "man", "m"):
            return cls.MEN
        if key in ("women", "woman", "w"):
            return cls.WOMEN
        raise ValueError(f"unknown side {value!r}")


class AgentIndex(NamedTuple):
    side: Side
    index: int

    def label(self) -> str:
        return f"{self.side.prefix}{self.index + 1}"


def man(i: int) -> AgentIndex:
    return AgentIndex(Side.MEN, i)


def woman(i: int) -> AgentIndex:
    return AgentIndex(Side.WOMEN, i)


def _is_permutation(row: Sequence[int], n: int) -> bool:
    return len(row) == n and sorted(row) == list(range(n))


def inverse_permutation(perm: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(perm)
    for pos, value in enumerate(perm):
        inv[value] = pos
    return tuple(inv)


def _check_row(side: str, r: int, row: Sequence[int], n: int) -> tuple[int, ...]:
    if len(row) != n:
        raise RowLengthMismatch(side, r, n, len(row))
    seen = set()
    out = []
    for value in row:
        v = int(value)
        if not 0 <= v < n:
            raise OutOfRange(side, r, v, n)
        if v in seen:
            raise DuplicateEntry(side, r, v)
        seen.add(v)
        out.append(v)
    return tuple(out)


@dataclass(frozen=True)
class RankTable:
    """rank[a][p] is the position of partner p in agent a's row (0 = favourite)."""

    men: tuple[tuple[int, ...], ...]
    women: tuple[tuple[int, ...], ...]

    @classmethod
    def from_rows(cls, men_rows, women_rows) -> "RankTable":
        return cls(
            tuple(inverse_permutation(r) for r in men_rows),
            tuple(inverse_permutation(r) for r in women_rows),
        )

    def of(self, side: Side) -> tuple[tuple[int, ...], ...]:
        return self.men if side is Side.MEN else self.women


@dataclass(frozen=True)
class PreferenceProfile:
    """Complete strict preferences of n men over n women and vice versa.

    ``men[i]`` lists woman indices most-preferred first, ``women[j]`` lists
    man indices most-preferred first.  Construction validates every row.
    """

    men: tuple[tuple[int, ...], ...]
    women: tuple[tuple[int, ...], ...]
    ranks: RankTable = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        n = len(self.men)
        if n < 1:
            raise ProfileError("a profile needs n >= 1")
        if len(self.women) != n:
            raise RowLengthMismatch("women", None, n, len(self.women))
        men = tuple(_check_row("men", r, row, n) for r, row in enumerate(self.men))
        women = tuple(_check_row("women", r, row, n) for r, row in enumerate(self.women))
        object.__setattr__(self, "men", men)
        object.__setattr__(self, "women", women)
        object.__setattr__(self, "ranks", RankTable.from_rows(men, women))

    @property
    def n(self) -> int:
        return len(self.men)

    def rows(self, side: Side) -> tuple[tuple[int, ...], ...]:
        return self.men if side is Side.MEN else self.women

    def rank(self, agent: AgentIndex, partner: int) -> int:
        return self.ranks.of(agent.side)[agent.index][partner]

    # position-access interface used by the linear-time checkers
    def man_pref_at(self, m: int, position: int) -> int:
        return self.men[m][position]

    def woman_pref_at(self, w: int, position: int) -> int:
        return self.women[w][position]

    def swap_sides(self) -> "PreferenceProfile":
        """The same market with the roles of men and women exchanged."""
        return PreferenceProfile(self.women, self.men)

    def as_array(self, dtype=np.int64) -> np.ndarray:
        """Shape (2, n, n): index 0 holds the men's rows, index 1 the women's."""
        return np.array([self.men, self.women], dtype=dtype)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "PreferenceProfile":
        return cls(tuple(map(tuple, arr[0].tolist())), tuple(map(tuple, arr[1].tolist())))


def validate_profile(raw) -> PreferenceProfile:
    """Build a validated profile from loosely typed data.

    ``raw`` is either a mapping with ``men`` and ``women`` (and optionally
    ``n``) or a pair ``(men_rows, women_rows)``.  Rows are 0-based.
    """
    if isinstance(raw, PreferenceProfile):
        return raw
    if isinstance(raw, Mapping):
        men_rows, women_rows = raw["men"], raw["women"]
        n = raw.get("n", len(men_rows))
    else:
        men_rows, women_rows = raw
        n = len(men_rows)
    n = int(n)
    if n < 1:
        raise ProfileError("a profile needs n >= 1")
    if len(men_rows) != n:
        raise RowLengthMismatch("men", None, n, len(men_rows))
    if len(women_rows) != n:
        raise RowLengthMismatch("women", None, n, len(women_rows))
    return PreferenceProfile(tuple(tuple(r) for r in men_rows), tuple(tuple(r) for r in women_rows))


def prefers(profile: PreferenceProfile, agent: AgentIndex, a: int, b: int) -> bool:
    """True iff ``agent`` ranks partner ``a`` strictly above partner ``b``."""
    n = profile.n
    if not (0 <= agent.index < n and 0 <= a < n and 0 <= b < n):
        raise IndexError("agent or partner index out of range")
    if a == b:
        raise ValueError("prefers() needs two distinct partners")
    ranks = profile.ranks.of(agent.side)[agent.index]
    return ranks[a] < ranks[b]


@dataclass(frozen=True)
class Matching:
    """A perfect matching; ``man_to_woman[m]`` is the woman matched to man m."""

    man_to_woman: tuple[int, ...]
    woman_to_man: tuple[int, ...] = field(init=False, compare=False)

    def __post_init__(self) -> None:
        m2w = tuple(int(w) for w in self.man_to_woman)
        if not _is_permutation(m2w, len(m2w)):
            raise ValueError(f"not a perfect matching: {m2w}")
        object.__setattr__(self, "man_to_woman", m2w)
        object.__setattr__(self, "woman_to_man", inverse_permutation(m2w))

    @property
    def n(self) -> int:
        return len(self.man_to_woman)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "Matching":
        pairs = sorted(pairs)
        return cls(tuple(w for _, w in pairs))

    @classmethod
    def from_woman_to_man(cls, w2m: Sequence[int]) -> "Matching":
        return cls(inverse_permutation(w2m))

    def pairs(self) -> list[tuple[int, int]]:
        return list(enumerate(self.man_to_woman))

    def partner(self, agent: AgentIndex) -> int:
        if agent.side is Side.MEN:
            return self.man_to_woman[agent.index]
        return self.woman_to_man[agent.index]


@dataclass(frozen=True)
class ProfileOrdering:
    """Orderings of men and women; ``men_order[i]`` is the man placed i-th."""

    men_order: tuple[int, ...]
    women_order: tuple[int, ...]

    def __post_init__(self) -> None:
        men = tuple(int(x) for x in self.men_order)
        women = tuple(int(x) for x in self.women_order)
        if len(men) != len(women):
            raise DimensionMismatch("men and women orderings differ in length")
        if not _is_permutation(men, len(men)) or not _is_permutation(women, len(women)):
            raise ValueError("orderings must be permutations of 0..n-1")
        object.__setattr__(self, "men_order", men)
        object.__setattr__(self, "women_order", women)

    @property
    def n(self) -> int:
        return len(self.men_order)

    @classmethod
    def identity(cls, n: int) -> "ProfileOrdering":
        return cls(tuple(range(n)), tuple(range(n)))

    def inverse(self) -> "ProfileOrdering":
        return ProfileOrdering(inverse_permutation(self.men_order), inverse_permutation(self.women_order))

    def swap_sides(self) -> "ProfileOrdering":
        return ProfileOrdering(self.women_order, self.men_order)


def relabel(profile: PreferenceProfile, ordering: ProfileOrdering) -> PreferenceProfile:
    """Rename agents so that the i-th agent of each ordering becomes agent i."""
    if ordering.n != profile.n:
        raise DimensionMismatch(f"ordering has n={ordering.n}, profile has n={profile.n}")
    new_man = inverse_permutation(ordering.men_order)
    new_woman = inverse_permutation(ordering.women_order)
    men = tuple(tuple(new_woman[w] for w in profile.men[old]) for old in ordering.men_order)
    women = tuple(tuple(new_man[m] for m in profile.women[old]) for old in ordering.women_order)
    return PreferenceProfile(men, women)
