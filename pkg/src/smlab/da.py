"""Instrumented deferred acceptance.

A round is one pass of the outer loop: every proposer who is unmatched when
the round starts proposes once, in ascending index order.  A proposer who is
displaced during a round waits for the next one.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .core import AgentIndex, Matching, PreferenceProfile, Side


class ProposalResult(enum.Enum):
    ACCEPTED = "accepted"
    REJECTED = "rejected"
    DISPLACED = "displaced"


@dataclass(frozen=True)
class ProposalEvent:
    round: int
    proposer: AgentIndex
    target: AgentIndex
    result: ProposalResult
    displaced: AgentIndex | None = None


@dataclass(frozen=True)
class DaOutcome:
    proposing_side: Side
    matching: Matching
    proposal_count: int
    round_count: int
    per_receiver_proposals: tuple[int, ...]
    trace: tuple[ProposalEvent, ...]

    @property
    def round_sizes(self) -> tuple[int, ...]:
        sizes = [0] * self.round_count
        for ev in self.trace:
            sizes[ev.round - 1] += 1
        return tuple(sizes)


def max_proposals(n: int) -> int:
    return n * n - n + 1


def max_rounds(n: int) -> int:
    return n * n - 2 * n + 2


def run_da(profile: PreferenceProfile, proposing_side: Side | str = Side.MEN) -> DaOutcome:
    side = Side.parse(proposing_side)
    n = profile.n
    proposer_rows = profile.rows(side)
    receiver_ranks = profile.ranks.of(side.other)

    next_choice = [0] * n
    holder = [-1] * n  # receiver -> proposer currently held
    partner = [-1] * n  # proposer -> receiver
    received = [0] * n
    trace: list[ProposalEvent] = []
    free = list(range(n))
    rnd = 0
    while free:
        rnd += 1
        rejected = []
        for p in free:
            r = proposer_rows[p][next_choice[p]]
            next_choice[p] += 1
            received[r] += 1
            current = holder[r]
            proposer, target = AgentIndex(side, p), AgentIndex(side.other, r)
            if current < 0:
                holder[r], partner[p] = p, r
                trace.append(ProposalEvent(rnd, proposer, target, ProposalResult.ACCEPTED))
            elif receiver_ranks[r][p] < receiver_ranks[r][current]:
                holder[r], partner[p], partner[current] = p, r, -1
                rejected.append(current)
                trace.append(
                    ProposalEvent(rnd, proposer, target, ProposalResult.DISPLACED, AgentIndex(side, current))
                )
            else:
                rejected.append(p)
                trace.append(ProposalEvent(rnd, proposer, target, ProposalResult.REJECTED))
        free = sorted(rejected)

    if side is Side.MEN:
        matching = Matching(tuple(partner))
    else:
        matching = Matching.from_woman_to_man(partner)
    return DaOutcome(side, matching, len(trace), rnd, tuple(received), tuple(trace))


def run_da_dual(profile: PreferenceProfile) -> tuple[DaOutcome, DaOutcome]:
    """Men-proposing and women-proposing outcomes, in that order."""
    return run_da(profile, Side.MEN), run_da(profile, Side.WOMEN)
