"""JSON-ready views of results.  Agents are rendered 1-based as "m3" / "w1"."""

from __future__ import annotations

import json

from .conditions import Condition, ConditionReport, RegionLabel
from .core import AgentIndex, Matching, ProfileOrdering, Side
from .da import DaOutcome
from .stability import StableSet


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def label(side: Side, index: int) -> str:
    return AgentIndex(side, index).label()


def matching_json(matching: Matching) -> list[list[str]]:
    return [[label(Side.MEN, m), label(Side.WOMEN, w)] for m, w in matching.pairs()]


def ordering_json(ordering: ProfileOrdering) -> dict:
    return {
        "men_order": [label(Side.MEN, m) for m in ordering.men_order],
        "women_order": [label(Side.WOMEN, w) for w in ordering.women_order],
    }


_PROPOSING = {
    Condition.M_MAXPROP: Side.MEN,
    Condition.M_MAXROU: Side.MEN,
    Condition.W_MAXPROP: Side.WOMEN,
    Condition.W_MAXROU: Side.WOMEN,
}


def condition_report_json(report: ConditionReport) -> dict:
    proposing = _PROPOSING.get(report.condition)
    witness: dict = {}
    if report.ordering is not None:
        witness["ordering"] = ordering_json(report.ordering)
    if report.failed is not None:
        witness["failed_condition"] = report.failed.value
    if report.cycle:
        witness["cycle"] = [label(proposing.other, r) for r in report.cycle]
    for key, values in report.evidence.items():
        if key in ("men_optimal", "women_optimal"):
            witness[key] = matching_json(Matching(values))
        elif key == "remaining_men":
            witness[key] = [label(Side.MEN, v) for v in values]
        elif key == "remaining_women":
            witness[key] = [label(Side.WOMEN, v) for v in values]
        elif key in ("proposers", "proposer"):
            witness[key] = [label(proposing, v) for v in values]
        elif key == "receiver":
            witness[key] = [label(proposing.other, v) for v in values]
        else:
            witness[key] = list(values)
    out = {"condition": report.condition.value, "verdict": report.verdict, "witness": witness}
    if proposing is not None:
        out["queries"] = report.queries
    return out


def da_outcome_json(outcome: DaOutcome, trace: bool = False) -> dict:
    recv = outcome.proposing_side.other
    out = {
        "proposing": outcome.proposing_side.value,
        "matching": matching_json(outcome.matching),
        "proposal_count": outcome.proposal_count,
        "round_count": outcome.round_count,
        "round_sizes": list(outcome.round_sizes),
        "per_receiver_proposals": {label(recv, r): c for r, c in enumerate(outcome.per_receiver_proposals)},
    }
    if trace:
        events = []
        for ev in outcome.trace:
            item = {
                "round": ev.round,
                "proposer": ev.proposer.label(),
                "target": ev.target.label(),
                "result": ev.result.value,
            }
            if ev.displaced is not None:
                item["displaced"] = ev.displaced.label()
            events.append(item)
        out["trace"] = events
    return out


def da_outcome_text(outcome: DaOutcome, trace: bool = False) -> str:
    lines = [
        f"proposing side: {outcome.proposing_side.value}",
        f"proposals: {outcome.proposal_count}",
        f"rounds: {outcome.round_count}",
        "matching: " + ", ".join(f"{m}-{w}" for m, w in matching_json(outcome.matching)),
    ]
    if trace:
        for ev in outcome.trace:
            note = f" (displaces {ev.displaced.label()})" if ev.displaced is not None else ""
            lines.append(f"  round {ev.round}: {ev.proposer.label()} -> {ev.target.label()} {ev.result.value}{note}")
    return "\n".join(lines) + "\n"


def stable_set_json(stable: StableSet) -> dict:
    return {"count": len(stable), "matchings": [matching_json(m) for m in stable.matchings]}


def region_json(region: RegionLabel) -> dict:
    return {"region": region.bits, "conditions": region.as_dict()}
