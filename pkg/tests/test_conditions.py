import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import profiles
from smlab import (
    Condition,
    FailedCondition,
    PreferenceProfile,
    ProfileOrdering,
    Side,
    build_second_pref_digraph,
    classify,
    is_max_prop,
    is_max_rou,
    is_ncc,
    is_spc,
    is_usm,
    run_da,
)
from smlab.conditions import (
    PartialProfile,
    QueryBudgetExceeded,
    QueryCounter,
    SecondPrefDigraph,
    check,
    satisfies_maxprop_ordering,
    satisfies_ncc_ordering,
    satisfies_spc_ordering,
)
from smlab.errors import InstanceTooLarge, LabelingInvalid, MissingPosition
from smlab.generators import gen_extremal, gen_fixture


def replay_maxprop(p: PreferenceProfile, o: ProfileOrdering, side: Side) -> bool:
    """The three structural conditions, read straight off the rows."""
    if side is Side.WOMEN:
        p, o = p.swap_sides(), o.swap_sides()
    M, W, n = o.men_order, o.women_order, p.n
    if any(p.men[m][-1] != W[-1] for m in M):
        return False
    for i in range(n - 1):
        if p.women[W[i]][0] != M[i] or p.men[M[i]][-2] != W[i]:
            return False
        if n > 1 and p.women[W[i]][1] not in M[i + 1:]:
            return False
    return True


def full(n):
    return n * n - n + 1, n * n - 2 * n + 2


# ---------------------------------------------------------------------------
# MaxProp / MaxRou


@given(profiles(max_n=6), st.sampled_from(Side))
def test_maxprop_maxrou_agree_with_da_counts(p, side):
    out = run_da(p, side)
    props, rounds = full(p.n)
    assert is_max_prop(p, side).verdict == (out.proposal_count == props)
    assert is_max_rou(p, side).verdict == (out.round_count == rounds)


@given(st.integers(2, 14), st.integers(0, 2**32 - 1))
def test_planted_maxprop_profiles(n, seed):
    men, women = oracles.planted_max_prop(np.random.default_rng(seed), n)
    p = PreferenceProfile(men, women)
    rep = is_max_prop(p, Side.MEN)
    assert rep.verdict
    assert run_da(p, Side.MEN).proposal_count == full(n)[0]
    assert replay_maxprop(p, rep.ordering, Side.MEN)
    # the same profile, sides swapped, is w-MaxProp
    assert is_max_prop(p.swap_sides(), Side.WOMEN).verdict


@given(profiles(min_n=2, max_n=6), st.sampled_from(Side))
def test_true_verdict_witness_replays(p, side):
    for checker in (is_max_prop, is_max_rou):
        rep = checker(p, side)
        if rep.verdict:
            assert replay_maxprop(p, rep.ordering, side)
            assert satisfies_maxprop_ordering(p, rep.ordering, side)
            graph = build_second_pref_digraph(p, rep.ordering, side)
            assert graph.find_cycle() is None
            assert graph.topological_order() == tuple(range(p.n - 1))


@given(profiles(min_n=2, max_n=6))
def test_false_verdict_evidence_is_real(p):
    rep = is_max_prop(p, Side.MEN)
    if rep.verdict:
        return
    if rep.failed is FailedCondition.LEAST_PREFERRED:
        a, b = rep.evidence["proposers"]
        assert p.men[a][-1] != p.men[b][-1]
    elif rep.failed is FailedCondition.PENULTIMATE:
        (w,), (m,) = rep.evidence["receiver"], rep.evidence["proposer"]
        assert p.women[w][0] == m and p.men[m][-2] != w
    else:
        assert rep.failed is FailedCondition.SECOND_PREF_ACYCLIC
        cyc = rep.cycle
        assert len(cyc) >= 1
        # each receiver's second choice has the next receiver as his penultimate
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            assert p.men[p.women[a][1]][-2] == b


@pytest.mark.parametrize(
    "name, failed",
    [
        ("no-common-last", FailedCondition.LEAST_PREFERRED),
        ("no-penultimate", FailedCondition.PENULTIMATE),
        ("cyclic-second-prefs", FailedCondition.SECOND_PREF_ACYCLIC),
    ],
)
def test_each_structural_condition_is_needed(name, failed):
    p = gen_fixture(name)
    rep = is_max_prop(p, Side.MEN)
    assert not rep.verdict and rep.failed is failed
    assert run_da(p, Side.MEN).proposal_count < full(p.n)[0]


def test_maxprop_without_maxrou_fails_on_top_prefs():
    p = gen_fixture("maxprop-not-maxrou")
    assert is_max_prop(p, Side.MEN).verdict
    rep = is_max_rou(p, Side.MEN)
    assert not rep.verdict and rep.failed is FailedCondition.ONTO_TOP_PREFS


@pytest.mark.parametrize("n", [1, 2, 3, 7, 40, 200])
def test_query_budget_on_extremal(n):
    p = gen_extremal(n) if n > 1 else PreferenceProfile(((0,),), ((0,),))
    for checker in (is_max_prop, is_max_rou):
        rep = checker(p, Side.MEN)
        assert rep.verdict
        assert rep.queries <= 8 * n


def test_budget_is_enforced():
    p = gen_extremal(5)
    counter = QueryCounter(p, Side.MEN, limit=5)
    with pytest.raises(QueryBudgetExceeded):
        is_max_prop(p, Side.MEN, counter=counter)


@given(profiles(min_n=2, max_n=6))
def test_partial_profile_gives_the_same_verdicts(p):
    men_part = PartialProfile.from_profile(p, men_positions=(0, -2, -1), women_positions=(0, 1))
    women_part = PartialProfile.from_profile(p, men_positions=(0, 1), women_positions=(0, -2, -1))
    assert is_max_prop(men_part, Side.MEN) == is_max_prop(p, Side.MEN)
    assert is_max_rou(men_part, Side.MEN) == is_max_rou(p, Side.MEN)
    assert is_max_prop(women_part, Side.WOMEN) == is_max_prop(p, Side.WOMEN)
    assert is_max_rou(women_part, Side.WOMEN) == is_max_rou(p, Side.WOMEN)


def test_partial_profile_missing_position():
    part = PartialProfile(2, {0: {0: 1}}, {})
    with pytest.raises(MissingPosition):
        part.man_pref_at(0, 1)
    with pytest.raises(MissingPosition):
        part.woman_pref_at(1, 0)


def test_second_pref_digraph_rejects_bad_labelings():
    p = gen_extremal(4)
    with pytest.raises(LabelingInvalid):
        build_second_pref_digraph(p, ProfileOrdering.identity(4), Side.MEN)
    with pytest.raises(LabelingInvalid):
        build_second_pref_digraph(p, ProfileOrdering.identity(3), Side.MEN)


def test_digraph_cycle_and_order():
    g = SecondPrefDigraph((1, 2, 0, None))
    assert sorted(g.find_cycle()) == [0, 1, 2]
    assert g.topological_order() is None
    h = SecondPrefDigraph((2, None, 1))
    assert h.find_cycle() is None
    assert h.topological_order() == (0, 2, 1)


def test_n3_maxprop_checker_matches_counts_exhaustively():
    from smlab.census import enumerate_profiles

    bad = 0
    for p in enumerate_profiles(3):
        for side in Side:
            out = run_da(p, side)
            bad += is_max_prop(p, side).verdict != (out.proposal_count == 7)
            bad += is_max_rou(p, side).verdict != (out.round_count == 5)
    assert bad == 0


# ---------------------------------------------------------------------------
# SPC / NCC


@given(profiles(max_n=4))
def test_spc_matches_ordering_search(p):
    rep = is_spc(p)
    assert rep.verdict == oracles.spc_by_orderings(p.men, p.women)
    if rep.verdict:
        assert satisfies_spc_ordering(p, rep.ordering)
    else:
        left_m, left_w = rep.evidence["remaining_men"], rep.evidence["remaining_women"]
        assert len(left_m) == len(left_w) >= 1
        for m in left_m:
            w = min(left_w, key=lambda x: p.ranks.men[m][x])
            assert min(left_m, key=lambda x: p.ranks.women[w][x]) != m


def _eliminations(p, men, women):
    """Verdicts reachable by removing fixed pairs in every possible order."""
    if not men:
        return {True}
    fixed = []
    for m in men:
        w = min(women, key=lambda x: p.ranks.men[m][x])
        if min(men, key=lambda x: p.ranks.women[w][x]) == m:
            fixed.append((m, w))
    if not fixed:
        return {False}
    out = set()
    for m, w in fixed:
        out |= _eliminations(p, [x for x in men if x != m], [x for x in women if x != w])
    return out


def test_fixed_pair_removal_is_confluent_at_n3():
    from smlab.census import enumerate_profiles

    for p in enumerate_profiles(3):
        outcomes = _eliminations(p, [0, 1, 2], [0, 1, 2])
        assert outcomes == {is_spc(p).verdict}


@given(profiles(max_n=3))
def test_ncc_matches_ordering_search(p):
    rep = is_ncc(p)
    assert rep.verdict == oracles.ncc_by_orderings(p.men, p.women)
    if rep.verdict:
        o = rep.ordering
        assert oracles.ncc_ordering_ok(p.men, p.women, o.men_order, o.women_order)
        assert satisfies_ncc_ordering(p, o)
        n = p.n
        first = next(
            (ms, ws)
            for ms in itertools.permutations(range(n))
            for ws in itertools.permutations(range(n))
            if oracles.ncc_ordering_ok(p.men, p.women, ms, ws)
        )
        assert (o.men_order, o.women_order) == first


def test_ncc_exhaustive_n2_and_sampled_n3(rng):
    from smlab.census import enumerate_profiles

    for p in enumerate_profiles(2):
        assert is_ncc(p).verdict == oracles.ncc_by_orderings(p.men, p.women)
    for _ in range(300):
        men, women = oracles.random_rows(rng, 3)
        p = PreferenceProfile(men, women)
        assert is_ncc(p).verdict == oracles.ncc_by_orderings(men, women)


def test_ncc_witness_need_not_be_an_spc_ordering():
    # both men rank w2 first, both women rank m1 first
    p = PreferenceProfile(((1, 0), (1, 0)), ((0, 1), (0, 1)))
    rep = is_ncc(p)
    assert rep.verdict and is_spc(p).verdict
    assert not satisfies_spc_ordering(p, rep.ordering)


@given(profiles(max_n=4))
def test_ncc_implies_spc(p):
    if p.n <= 4 and is_ncc(p).verdict:
        assert is_spc(p).verdict


def test_ncc_ceiling():
    with pytest.raises(InstanceTooLarge):
        is_ncc(gen_extremal(4), max_n=3)


# ---------------------------------------------------------------------------
# fixtures and classification


def test_fixture_regions():
    assert classify(gen_fixture("usm-not-spc-not-maxprop")).bits == "1000000"
    assert classify(gen_fixture("maxprop-not-maxrou")).bits == "1001000"
    assert classify(gen_fixture("usm-maxprop-not-spc")).bits == "1001010"
    spc_gap = classify(gen_fixture("spc-not-maxprop"))
    assert spc_gap.spc and spc_gap.ncc and spc_gap.usm
    assert not (spc_gap.m_maxprop or spc_gap.w_maxprop)
    for name in ("two-stable-a", "two-stable-b"):
        assert classify(gen_fixture(name)).bits == "0000000"


def test_spc_witness_on_the_gap_fixture():
    rep = is_spc(gen_fixture("spc-not-maxprop"))
    assert rep.ordering == ProfileOrdering((0, 1), (0, 1))


def test_classify_marks_skipped_ncc():
    label = classify(gen_extremal(4), ncc_ceiling=3)
    assert label.ncc is None and label.bits[2] == "-"
    assert label.as_dict()["ncc"] is None


@pytest.mark.parametrize("cond", list(Condition))
def test_check_dispatches_by_name(cond):
    p = gen_fixture("maxprop-not-maxrou")
    rep = check(p, cond.value)
    assert rep.condition is cond
    label = classify(p)
    assert rep.verdict == label.as_dict()[cond.value]


def test_usm_evidence_includes_both_extremes_when_not_unique():
    rep = check(gen_fixture("two-stable-a"), Condition.USM)
    assert not rep.verdict
    usm = is_usm(gen_fixture("two-stable-a"))
    assert rep.evidence["men_optimal"] == usm.men_optimal.man_to_woman
    assert rep.evidence["women_optimal"] == usm.women_optimal.man_to_woman
