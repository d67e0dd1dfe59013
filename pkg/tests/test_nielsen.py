import json
from fractions import Fraction
from pathlib import Path

import pytest

from iwip.graphmap import GraphMapError, from_json_obj, rose_representative
from iwip.nielsen import (
    Explicit, FeighnHandel, LcmHeuristic, PeriodPolicyRefused, candidate_powers, component_subgroups,
    direction_cycle_lcm, eigenray_prefix, feighn_handel_power, find_inps, find_pinps, fixed_directions,
    inp_check, is_atoroidal, is_primitively_atoroidal, landau, nielsen_graph, paper_leg_bound, parse_policy,
    periodic_points,
)
from iwip.oracle import brute_inps, inp_signature
from iwip.traintrack import bestvina_handel
from iwip.words import are_conjugate, inverse, mod2_class, parse_word

from conftest import FIBONACCI, TRIBONACCI_LIKE, TWISTED_FIBONACCI, aut


def same_cyclic_subgroup(w, target):
    """<w> is conjugate to <target>: w or its inverse is a cyclic conjugate of target."""
    return are_conjugate(w, target) or are_conjugate(inverse(w), target)


def tt(text):
    return bestvina_handel(rose_representative(aut(text))).map


def test_policy_parsing():
    assert parse_policy("lcm") == LcmHeuristic()
    assert parse_policy("lcm:2") == LcmHeuristic(2)
    assert parse_policy("explicit:5") == Explicit(5)
    assert parse_policy("feighn-handel") == FeighnHandel()
    with pytest.raises(ValueError):
        parse_policy("sometimes")


def test_landau_values():
    assert [landau(k) for k in range(1, 11)] == [1, 2, 3, 4, 6, 6, 12, 15, 20, 30]


def test_feighn_handel_refuses_above_cap():
    with pytest.raises(PeriodPolicyRefused):
        feighn_handel_power(2, cap=10**6)
    assert feighn_handel_power(1) == 1


def test_lcm_powers_keep_maximal_multiples():
    f = tt(FIBONACCI)
    assert direction_cycle_lcm(f) == 2
    assert candidate_powers(f, LcmHeuristic()) == [6, 8]
    assert candidate_powers(f, Explicit(3)) == [3]
    assert candidate_powers(f, LcmHeuristic(), max_period=4) == [4]


def test_periodic_points_are_fixed_by_the_power():
    f = tt("a->bab; b->ba")
    for n in (1, 2, 3):
        for p in periodic_points(f, n):
            q = p
            for _ in range(n):
                q = f.point_image(q)
            assert q == p


def test_eigenray_prefix_grows_from_fixed_direction():
    f = tt(FIBONACCI)
    assert fixed_directions(f) == [1]
    ray = eigenray_prefix(f, 1, 8)
    assert ray[:8] == parse_word("abaababa")


def test_fibonacci_pinp_has_period_two():
    f = tt(FIBONACCI)
    assert find_inps(f) == []
    search = find_pinps(f)
    assert [p.period for p in search.pinps] == [2]
    p = search.pinps[0]
    assert p.start.is_vertex and p.end(f.graph).is_vertex
    assert inp_check(f, p, 2)
    assert not inp_check(f, p, 1)


def test_fibonacci_nielsen_graph_carries_commutator():
    f = tt(FIBONACCI)
    S = nielsen_graph(find_pinps(f).pinps, f.graph)
    subs = component_subgroups(S, f)
    assert len(subs) == 1 and len(subs[0]) == 1
    assert same_cyclic_subgroup(subs[0][0], parse_word("abAB"))


def test_fibonacci_atoroidality():
    f = tt(FIBONACCI)
    a = is_atoroidal(f)
    assert not a.value
    assert same_cyclic_subgroup(a.witness, parse_word("abAB"))
    p = is_primitively_atoroidal(f, search=a.search)
    assert p.value
    assert mod2_class(a.witness, 2) == (0, 0)


def test_twisted_fibonacci_matches_fibonacci():
    f = tt(TWISTED_FIBONACCI)
    a = is_atoroidal(f)
    assert not a.value
    assert same_cyclic_subgroup(a.witness, parse_word("abAB"))


def test_tribonacci_has_no_pinps():
    f = tt(TRIBONACCI_LIKE)
    search = find_pinps(f)
    assert search.pinps == ()
    assert search.powers == (18, 24)
    assert is_atoroidal(f, search=search).value


def test_period_one_inp_matches_brute_force():
    f = tt("a->aba; b->ab")
    fast = find_inps(f)
    assert len(fast) == 1
    assert inp_signature(f, fast) == inp_signature(f, brute_inps(f, paper_leg_bound(f)))


def test_interior_endpoint_encoding():
    corpus = json.loads((Path(__file__).parent / "data" / "inp_corpus.json").read_text())
    seen_interior = False
    for item in corpus:
        f = from_json_obj(item["map"])
        for p in find_inps(f):
            for leg in (p.alpha, p.beta):
                if leg.start.point.is_vertex:
                    continue
                seen_interior = True
                enc = leg.start.to_json(f.graph)
                assert enc["k"] == 1 and 1 <= enc["q"] <= len(enc["image"])
                xi = Fraction(enc["xi"])
                assert 0 < xi < 1
    assert seen_interior


def test_budget_skips_large_powers():
    f = tt(FIBONACCI)
    search = find_pinps(f, budget=30)
    assert search.skipped and not search.complete_for_policy


def test_non_train_track_input_rejected():
    with pytest.raises(GraphMapError):
        find_inps(rose_representative(aut(TWISTED_FIBONACCI)))
