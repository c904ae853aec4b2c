"""Condition checkers: MaxProp, MaxRou, SPC, NCC, plus region classification.

MaxProp and MaxRou are decided from a handful of preference positions
(proposers' last, penultimate and, for MaxRou, first entries; receivers'
first and second entries) without simulating deferred acceptance.  Every
lookup goes through :class:`QueryCounter`, which enforces the linear budget.
"""

from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Mapping, Protocol

from .core import PreferenceProfile, ProfileOrdering, Side
from .errors import InstanceTooLarge, LabelingInvalid, MissingPosition, SmlabError
from .stability import is_usm

QUERY_FACTOR = 8
DEFAULT_NCC_CEILING = 6


class Condition(enum.Enum):
    USM = "usm"
    SPC = "spc"
    NCC = "ncc"
    M_MAXPROP = "m-maxprop"
    W_MAXPROP = "w-maxprop"
    M_MAXROU = "m-maxrou"
    W_MAXROU = "w-maxrou"


# bit order of RegionLabel.bits and of the census region keys
REGION_ORDER = (
    Condition.USM,
    Condition.SPC,
    Condition.NCC,
    Condition.M_MAXPROP,
    Condition.W_MAXPROP,
    Condition.M_MAXROU,
    Condition.W_MAXROU,
)


class FailedCondition(enum.Enum):
    LEAST_PREFERRED = "least-preferred"
    PENULTIMATE = "penultimate"
    SECOND_PREF_ACYCLIC = "second-pref-acyclic"
    ONTO_TOP_PREFS = "onto-top-prefs"


@dataclass(frozen=True)
class ConditionReport:
    """Verdict plus a replayable witness.

    ``evidence`` maps names to agent indices (0-based); which names appear
    depends on ``failed``.
    """

    condition: Condition
    verdict: bool
    ordering: ProfileOrdering | None = None
    failed: FailedCondition | None = None
    cycle: tuple[int, ...] = ()
    evidence: Mapping[str, tuple[int, ...]] = field(default_factory=dict)
    queries: int = 0

    def __bool__(self) -> bool:
        return self.verdict


# ---------------------------------------------------------------------------
# position access


class PreferencePositions(Protocol):
    n: int

    def man_pref_at(self, m: int, position: int) -> int: ...

    def woman_pref_at(self, w: int, position: int) -> int: ...


class PartialProfile:
    """Preferences known only at selected positions.

    Negative positions count from the end of a row, as for sequences.
    """

    def __init__(self, n: int, men: Mapping[int, Mapping[int, int]], women: Mapping[int, Mapping[int, int]]):
        self.n = n
        self._men = {m: {p % n: w for p, w in row.items()} for m, row in men.items()}
        self._women = {w: {p % n: m for p, m in row.items()} for w, row in women.items()}

    @classmethod
    def from_profile(
        cls,
        profile: PreferenceProfile,
        men_positions=(-2, -1),
        women_positions=(0, 1),
    ) -> "PartialProfile":
        n = profile.n
        men = {m: {p: profile.men[m][p] for p in men_positions} for m in range(n)}
        women = {w: {p: profile.women[w][p] for p in women_positions} for w in range(n)}
        return cls(n, men, women)

    def man_pref_at(self, m: int, position: int) -> int:
        try:
            return self._men[m][position % self.n]
        except KeyError:
            raise MissingPosition(f"m{m + 1} position {position}") from None

    def woman_pref_at(self, w: int, position: int) -> int:
        try:
            return self._women[w][position % self.n]
        except KeyError:
            raise MissingPosition(f"w{w + 1} position {position}") from None


class QueryBudgetExceeded(SmlabError, AssertionError):
    pass


class QueryCounter:
    """Counts preference-position lookups, oriented by proposing side."""

    def __init__(self, source: PreferencePositions, side: Side = Side.MEN, limit: int | None = None):
        self.source = source
        self.side = side
        self.limit = limit
        self.count = 0

    @property
    def n(self) -> int:
        return self.source.n

    def _tick(self) -> None:
        self.count += 1
        if self.limit is not None and self.count > self.limit:
            raise QueryBudgetExceeded(f"more than {self.limit} preference lookups")

    def proposer_at(self, p: int, position: int) -> int:
        self._tick()
        if self.side is Side.MEN:
            return self.source.man_pref_at(p, position)
        return self.source.woman_pref_at(p, position)

    def receiver_at(self, r: int, position: int) -> int:
        self._tick()
        if self.side is Side.MEN:
            return self.source.woman_pref_at(r, position)
        return self.source.man_pref_at(r, position)


# ---------------------------------------------------------------------------
# second-preference digraph


@dataclass(frozen=True)
class SecondPrefDigraph:
    """Functional digraph on label positions 0..n-2.

    ``out_edge[i] == j`` when the i-th receiver's second choice is the
    proposer paired with the j-th receiver; ``None`` when it is the sink
    proposer.
    """

    out_edge: tuple[int | None, ...]

    @property
    def size(self) -> int:
        return len(self.out_edge)

    def find_cycle(self) -> tuple[int, ...] | None:
        white, grey, black = 0, 1, 2
        color = [white] * self.size
        for start in range(self.size):
            if color[start] != white:
                continue
            path = []
            v = start
            while v is not None and color[v] == white:
                color[v] = grey
                path.append(v)
                v = self.out_edge[v]
            if v is not None and color[v] == grey:
                return tuple(path[path.index(v):])
            for u in path:
                color[u] = black
        return None

    def topological_order(self) -> tuple[int, ...] | None:
        """Vertices ordered so every edge points forward; None if cyclic."""
        indegree = [0] * self.size
        for j in self.out_edge:
            if j is not None:
                indegree[j] += 1
        queue = deque(v for v in range(self.size) if indegree[v] == 0)
        order = []
        while queue:
            v = queue.popleft()
            order.append(v)
            j = self.out_edge[v]
            if j is not None:
                indegree[j] -= 1
                if indegree[j] == 0:
                    queue.append(j)
        return tuple(order) if len(order) == self.size else None


def _digraph(acc: QueryCounter, receivers: list[int], proposers: list[int]) -> SecondPrefDigraph:
    position_of = {p: i for i, p in enumerate(proposers)}
    sink = proposers[-1]
    edges = []
    for r in receivers[:-1]:
        s = acc.receiver_at(r, 1)
        edges.append(None if s == sink else position_of[s])
    return SecondPrefDigraph(tuple(edges))


def _labeling_in_proposer_terms(labeling: ProfileOrdering, side: Side) -> tuple[list[int], list[int]]:
    if side is Side.MEN:
        return list(labeling.men_order), list(labeling.women_order)
    return list(labeling.women_order), list(labeling.men_order)


def build_second_pref_digraph(
    profile: PreferencePositions, labeling: ProfileOrdering, proposing_side: Side | str = Side.MEN
) -> SecondPrefDigraph:
    """Digraph of second preferences under a labeling meeting the first two conditions."""
    side = Side.parse(proposing_side)
    n = profile.n
    if labeling.n != n:
        raise LabelingInvalid("labeling size does not match the profile")
    acc = QueryCounter(profile, side)
    proposers, receivers = _labeling_in_proposer_terms(labeling, side)
    sink = receivers[-1]
    for p in proposers:
        if acc.proposer_at(p, -1) != sink:
            raise LabelingInvalid("last receiver is not every proposer's least preferred")
    for i in range(n - 1):
        p, r = proposers[i], receivers[i]
        if acc.receiver_at(r, 0) != p or acc.proposer_at(p, -2) != r:
            raise LabelingInvalid(f"pair at position {i + 1} is not top/penultimate-linked")
    return _digraph(acc, receivers, proposers)


# ---------------------------------------------------------------------------
# MaxProp / MaxRou


def _side_condition(side: Side, men: Condition, women: Condition) -> Condition:
    return men if side is Side.MEN else women


def _ordering(side: Side, proposers, receivers) -> ProfileOrdering:
    if side is Side.MEN:
        return ProfileOrdering(tuple(proposers), tuple(receivers))
    return ProfileOrdering(tuple(receivers), tuple(proposers))


def _max_prop(acc: QueryCounter, condition: Condition) -> ConditionReport:
    n = acc.n
    side = acc.side
    if n == 1:
        return ConditionReport(condition, True, ProfileOrdering.identity(1), queries=acc.count)

    def fail(kind, cycle=(), **evidence):
        return ConditionReport(
            condition, False, failed=kind, cycle=tuple(cycle),
            evidence={k: tuple(v) for k, v in evidence.items()}, queries=acc.count,
        )

    # 1: one receiver is everybody's last choice
    sink = acc.proposer_at(0, -1)
    for p in range(1, n):
        if acc.proposer_at(p, -1) != sink:
            return fail(FailedCondition.LEAST_PREFERRED, proposers=(0, p))

    # 2: every other receiver's favourite has her as his penultimate choice
    paired = [-1] * n
    receivers = [r for r in range(n) if r != sink]
    proposers = []
    for r in receivers:
        p = acc.receiver_at(r, 0)
        if acc.proposer_at(p, -2) != r:
            return fail(FailedCondition.PENULTIMATE, receiver=(r,), proposer=(p,))
        paired[p] = r
        proposers.append(p)
    leftover = paired.index(-1)
    receivers.append(sink)
    proposers.append(leftover)

    # 3: the second-preference digraph is acyclic
    graph = _digraph(acc, receivers, proposers)
    order = graph.topological_order()
    if order is None:
        cycle = graph.find_cycle()
        return fail(FailedCondition.SECOND_PREF_ACYCLIC, cycle=[receivers[i] for i in cycle])
    ordered_receivers = [receivers[i] for i in order] + [sink]
    ordered_proposers = [proposers[i] for i in order] + [leftover]
    return ConditionReport(
        condition, True, _ordering(side, ordered_proposers, ordered_receivers), queries=acc.count
    )


def is_max_prop(
    profile: PreferencePositions, proposing_side: Side | str = Side.MEN, *, counter: QueryCounter | None = None
) -> ConditionReport:
    """Does deferred acceptance from ``proposing_side`` make n^2-n+1 proposals?

    Decided structurally; a true verdict carries the labeling (ordering)
    under which the three structural conditions hold.
    """
    side = Side.parse(proposing_side)
    acc = counter or QueryCounter(profile, side, limit=QUERY_FACTOR * profile.n)
    condition = _side_condition(side, Condition.M_MAXPROP, Condition.W_MAXPROP)
    report = _max_prop(acc, condition)
    if acc.n == 2:
        # n=2 shortcut: MaxProp iff both proposers share a favourite
        shared = acc.proposer_at(0, 0) == acc.proposer_at(1, 0)
        if shared != report.verdict:
            raise AssertionError("n=2 top-preference test disagrees with the structural test")
        report = replace(report, queries=acc.count)
    return report


def is_max_rou(
    profile: PreferencePositions, proposing_side: Side | str = Side.MEN, *, counter: QueryCounter | None = None
) -> ConditionReport:
    """Does deferred acceptance from ``proposing_side`` run n^2-2n+2 rounds?"""
    side = Side.parse(proposing_side)
    acc = counter or QueryCounter(profile, side, limit=QUERY_FACTOR * profile.n)
    condition = _side_condition(side, Condition.M_MAXROU, Condition.W_MAXROU)
    base = _max_prop(acc, condition)
    if not base.verdict or acc.n == 1:
        return base
    n = acc.n
    sink = base.ordering.women_order[-1] if side is Side.MEN else base.ordering.men_order[-1]
    covered = [False] * n
    for p in range(n):
        covered[acc.proposer_at(p, 0)] = True
    for r in range(n):
        if r != sink and not covered[r]:
            return ConditionReport(
                condition, False, failed=FailedCondition.ONTO_TOP_PREFS,
                evidence={"receiver": (r,)}, queries=acc.count,
            )
    return ConditionReport(condition, True, base.ordering, queries=acc.count)


def satisfies_maxprop_ordering(
    profile: PreferenceProfile, ordering: ProfileOrdering, proposing_side: Side | str = Side.MEN
) -> bool:
    """Replay the three structural conditions on an explicit labeling."""
    side = Side.parse(proposing_side)
    n = profile.n
    proposers, receivers = _labeling_in_proposer_terms(ordering, side)
    prow, rrow = profile.rows(side), profile.rows(side.other)
    sink = receivers[-1]
    if any(prow[p][-1] != sink for p in proposers):
        return False
    for i in range(n - 1):
        if rrow[receivers[i]][0] != proposers[i] or prow[proposers[i]][-2] != receivers[i]:
            return False
    for k in range(n - 1):
        if rrow[receivers[k]][1] not in proposers[k + 1:]:
            return False
    return True


# ---------------------------------------------------------------------------
# SPC


def is_spc(profile: PreferenceProfile) -> ConditionReport:
    """Sequential preference condition via repeated removal of fixed pairs.

    A fixed pair is a man and a woman who rank each other first among the
    agents still present.  The lowest-indexed man in a fixed pair goes first.
    """
    n = profile.n
    men_left = list(range(n))
    women_left = list(range(n))
    mrank, wrank = profile.ranks.men, profile.ranks.women
    men_order, women_order = [], []
    while men_left:
        chosen = None
        for m in men_left:
            w = min(women_left, key=mrank[m].__getitem__)
            if min(men_left, key=wrank[w].__getitem__) == m:
                chosen = (m, w)
                break
        if chosen is None:
            return ConditionReport(
                Condition.SPC, False,
                evidence={"remaining_men": tuple(men_left), "remaining_women": tuple(women_left)},
            )
        m, w = chosen
        men_order.append(m)
        women_order.append(w)
        men_left.remove(m)
        women_left.remove(w)
    return ConditionReport(Condition.SPC, True, ProfileOrdering(tuple(men_order), tuple(women_order)))


def satisfies_spc_ordering(profile: PreferenceProfile, ordering: ProfileOrdering) -> bool:
    mrank, wrank = profile.ranks.men, profile.ranks.women
    M, W = ordering.men_order, ordering.women_order
    n = profile.n
    for i in range(n):
        for j in range(i + 1, n):
            if mrank[M[i]][W[j]] < mrank[M[i]][W[i]]:
                return False
            if wrank[W[i]][M[j]] < wrank[W[i]][M[i]]:
                return False
    return True


# ---------------------------------------------------------------------------
# NCC


def satisfies_ncc_ordering(profile: PreferenceProfile, ordering: ProfileOrdering) -> bool:
    """Check both no-crossing clauses for all i<j, k<l under ``ordering``."""
    mrank, wrank = profile.ranks.men, profile.ranks.women
    M, W = ordering.men_order, ordering.women_order
    n = profile.n
    for i, j in itertools.combinations(range(n), 2):
        for k, l in itertools.combinations(range(n), 2):
            mi, mj, wk, wl = M[i], M[j], W[k], W[l]
            if mrank[mi][wl] < mrank[mi][wk] and not mrank[mj][wl] < mrank[mj][wk]:
                return False
            if wrank[wk][mj] < wrank[wk][mi] and not wrank[wl][mj] < wrank[wl][mi]:
                return False
    return True


def _women_order_for(profile: PreferenceProfile, men_order: tuple[int, ...]) -> tuple[int, ...] | None:
    # Given the men's order, both clauses constrain each ordered pair of
    # women independently, so the lexicographically least admissible women
    # order is built greedily.
    n = profile.n
    mrank, wrank = profile.ranks.men, profile.ranks.women
    man_pairs = [(men_order[i], men_order[j]) for i, j in itertools.combinations(range(n), 2)]

    def may_precede(k: int, l: int) -> bool:
        for a, b in man_pairs:
            if mrank[a][l] < mrank[a][k] and not mrank[b][l] < mrank[b][k]:
                return False
            if wrank[k][b] < wrank[k][a] and not wrank[l][b] < wrank[l][a]:
                return False
        return True

    allowed = [[k == l or may_precede(k, l) for l in range(n)] for k in range(n)]
    remaining = list(range(n))
    order = []
    while remaining:
        pick = next((x for x in remaining if all(allowed[x][z] for z in remaining)), None)
        if pick is None:
            return None
        order.append(pick)
        remaining.remove(pick)
    return tuple(order)


def is_ncc(profile: PreferenceProfile, max_n: int = DEFAULT_NCC_CEILING) -> ConditionReport:
    """No crossing condition by search over men orderings.

    Exponential in n; ``max_n`` guards against runaway searches.  The witness
    is the lexicographically least (men_order, women_order) pair.
    """
    if profile.n > max_n:
        raise InstanceTooLarge(profile.n, max_n, "NCC search")
    for men_order in itertools.permutations(range(profile.n)):
        women_order = _women_order_for(profile, men_order)
        if women_order is not None:
            return ConditionReport(Condition.NCC, True, ProfileOrdering(men_order, women_order))
    return ConditionReport(Condition.NCC, False)


# ---------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class RegionLabel:
    usm: bool
    spc: bool
    ncc: bool | None  # None when skipped above the search ceiling
    m_maxprop: bool
    w_maxprop: bool
    m_maxrou: bool
    w_maxrou: bool

    def as_tuple(self) -> tuple:
        return (self.usm, self.spc, self.ncc, self.m_maxprop, self.w_maxprop, self.m_maxrou, self.w_maxrou)

    @property
    def bits(self) -> str:
        """Seven characters in REGION_ORDER; '-' marks a skipped condition."""
        return "".join("-" if v is None else str(int(v)) for v in self.as_tuple())

    def as_dict(self) -> dict[str, bool | None]:
        return {c.value: v for c, v in zip(REGION_ORDER, self.as_tuple())}


def classify(profile: PreferenceProfile, ncc_ceiling: int = DEFAULT_NCC_CEILING) -> RegionLabel:
    ncc = is_ncc(profile, ncc_ceiling).verdict if profile.n <= ncc_ceiling else None
    return RegionLabel(
        usm=is_usm(profile).unique,
        spc=is_spc(profile).verdict,
        ncc=ncc,
        m_maxprop=is_max_prop(profile, Side.MEN).verdict,
        w_maxprop=is_max_prop(profile, Side.WOMEN).verdict,
        m_maxrou=is_max_rou(profile, Side.MEN).verdict,
        w_maxrou=is_max_rou(profile, Side.WOMEN).verdict,
    )


def check(profile: PreferenceProfile, condition: Condition | str, ncc_ceiling: int = DEFAULT_NCC_CEILING) -> ConditionReport:
    """Dispatch a single condition by name."""
    cond = Condition(condition) if not isinstance(condition, Condition) else condition
    if cond is Condition.M_MAXPROP:
        return is_max_prop(profile, Side.MEN)
    if cond is Condition.W_MAXPROP:
        return is_max_prop(profile, Side.WOMEN)
    if cond is Condition.M_MAXROU:
        return is_max_rou(profile, Side.MEN)
    if cond is Condition.W_MAXROU:
        return is_max_rou(profile, Side.WOMEN)
    if cond is Condition.SPC:
        return is_spc(profile)
    if cond is Condition.NCC:
        return is_ncc(profile, ncc_ceiling)
    usm = is_usm(profile)
    evidence = {"men_optimal": usm.men_optimal.man_to_woman}
    if not usm.unique:
        evidence["women_optimal"] = usm.women_optimal.man_to_woman
    return ConditionReport(Condition.USM, usm.unique, evidence=evidence)
