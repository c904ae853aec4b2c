"""Blocking pairs, brute-force stable-set enumeration and the USM test.

``enumerate_stable`` is deliberately naive: it is the trusted oracle that the
DA-based ``is_usm`` is checked against.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass

from .core import Matching, PreferenceProfile
from .da import run_da_dual
from .errors import DimensionMismatch, InstanceTooLarge

DEFAULT_BRUTE_CEILING = 8


def brute_ceiling() -> int:
    value = os.environ.get("SMLAB_BRUTE_CEILING")
    return int(value) if value else DEFAULT_BRUTE_CEILING


@dataclass(frozen=True)
class BlockingPair:
    man: int
    woman: int


@dataclass(frozen=True)
class StableSet:
    matchings: tuple[Matching, ...]

    def __len__(self) -> int:
        return len(self.matchings)

    def __contains__(self, item: Matching) -> bool:
        return item in self.matchings


@dataclass(frozen=True)
class UsmResult:
    unique: bool
    men_optimal: Matching
    women_optimal: Matching

    def __bool__(self) -> bool:
        return self.unique


def find_blocking_pair(profile: PreferenceProfile, matching: Matching) -> BlockingPair | None:
    """Lexicographically least (man, woman) blocking pair, or None if stable."""
    n = profile.n
    if matching.n != n:
        raise DimensionMismatch(f"matching has n={matching.n}, profile has n={n}")
    mrank, wrank = profile.ranks.men, profile.ranks.women
    for m in range(n):
        current_w = matching.man_to_woman[m]
        for w in range(n):
            if w == current_w:
                continue
            if mrank[m][w] < mrank[m][current_w] and wrank[w][m] < wrank[w][matching.woman_to_man[w]]:
                return BlockingPair(m, w)
    return None


def is_stable(profile: PreferenceProfile, matching: Matching) -> bool:
    return find_blocking_pair(profile, matching) is None


def enumerate_stable(profile: PreferenceProfile, max_n: int | None = None) -> StableSet:
    """Every stable matching, found by scanning all n! matchings in lexicographic order."""
    ceiling = brute_ceiling() if max_n is None else max_n
    if profile.n > ceiling:
        raise InstanceTooLarge(profile.n, ceiling, "stable-set enumeration")
    found = []
    for perm in itertools.permutations(range(profile.n)):
        mu = Matching(perm)
        if find_blocking_pair(profile, mu) is None:
            found.append(mu)
    return StableSet(tuple(found))


def is_usm(profile: PreferenceProfile) -> UsmResult:
    """Unique stable matching iff the men- and women-optimal matchings coincide."""
    men_run, women_run = run_da_dual(profile)
    return UsmResult(men_run.matching == women_run.matching, men_run.matching, women_run.matching)
