import random

import pytest

from iwip.bench import load_generators
from iwip.decide import (
    FULLY_IRREDUCIBLE, NOT_FULLY_IRREDUCIBLE, StrictRefusal, bound_violations, compose_word,
    decide_automorphism, decide_word, parse_generator_word, replay,
)
from iwip.graphmap import rose_representative
from iwip.nielsen import Explicit, FeighnHandel
from iwip.words import Automorphism, mod2_class

from conftest import FIBONACCI, TRIBONACCI_LIKE, TWISTED_FIBONACCI, aut, random_automorphism


@pytest.mark.parametrize("text,outcome,kind", [
    (FIBONACCI, FULLY_IRREDUCIBLE, "WeaklyCleanAndPrimitivelyAtoroidal"),
    (TWISTED_FIBONACCI, FULLY_IRREDUCIBLE, "WeaklyCleanAndPrimitivelyAtoroidal"),
    (TRIBONACCI_LIKE, FULLY_IRREDUCIBLE, "WeaklyCleanAndPrimitivelyAtoroidal"),
    ("a->ab; b->b", NOT_FULLY_IRREDUCIBLE, "Reduction"),
    ("a->b; b->a", NOT_FULLY_IRREDUCIBLE, "FiniteOrder"),
    ("a->b; b->c; c->a", NOT_FULLY_IRREDUCIBLE, "FiniteOrder"),
    ("a->AC; b->caC; c->cbA", NOT_FULLY_IRREDUCIBLE, "NotPrimitivelyAtoroidal"),
    ("a->c; b->d; c->ab; d->a", NOT_FULLY_IRREDUCIBLE, "DisconnectedWhitehead"),
])
def test_certificates_and_replay(text, outcome, kind):
    phi = aut(text)
    v = decide_automorphism(phi)
    assert v.outcome == outcome
    assert v.certificate.kind == kind
    assert replay(v, phi)
    assert bound_violations(v, rose_representative(phi)) == []
    assert v.to_json()["certificate"]["kind"] == kind


def test_identity_is_not_fully_irreducible():
    assert decide_automorphism(Automorphism.identity(2)).outcome == NOT_FULLY_IRREDUCIBLE


def test_not_primitively_atoroidal_witness_is_periodic():
    v = decide_automorphism(aut("a->AC; b->caC; c->cbA"))
    w = v.certificate.witness
    assert any(mod2_class(w, 3))


def test_replay_rejects_wrong_automorphism():
    v = decide_automorphism(aut(FIBONACCI))
    assert not replay(v, aut(TRIBONACCI_LIKE))


def test_generator_words():
    gens = load_generators(None, 2)
    assert parse_generator_word("r12 p12^-1") == [("r12", 1), ("p12", -1)]
    assert compose_word("r12 p12", gens).format() == "a->b; b->ab"
    assert decide_word("", gens, 2).outcome == NOT_FULLY_IRREDUCIBLE
    assert decide_word("r12 p12", gens).outcome == FULLY_IRREDUCIBLE
    with pytest.raises(KeyError):
        compose_word("zz", gens)


def test_conjugate_words_agree():
    gens = load_generators(None, 2)
    w = "r12 p12"
    assert decide_word(w, gens).outcome == decide_word("i1 " + w + " i1^-1", gens).outcome


def test_strict_mode_refuses_heuristic_answer():
    with pytest.raises(StrictRefusal) as info:
        decide_automorphism(aut(FIBONACCI), strict=True)
    assert info.value.verdict.outcome == FULLY_IRREDUCIBLE


def test_feighn_handel_refusal_falls_back_and_is_marked():
    v = decide_automorphism(aut(FIBONACCI), policy=FeighnHandel())
    assert v.outcome == FULLY_IRREDUCIBLE
    assert v.policy_relative
    assert "policy_refused" in v.stats


def test_explicit_policy_records_powers():
    v = decide_automorphism(aut(FIBONACCI), policy=Explicit(2))
    assert v.stats["powers_searched"] == [2]


def test_fast_order_gives_same_outcome():
    for text in (FIBONACCI, "a->c; b->d; c->ab; d->a", "a->AC; b->caC; c->cbA"):
        assert decide_automorphism(aut(text), fast=True).outcome == decide_automorphism(aut(text)).outcome


@pytest.mark.parametrize("seed", range(8))
def test_random_verdicts_replay(seed):
    rng = random.Random(100 + seed)
    phi = random_automorphism(rng.choice([2, 3]), rng.randint(2, 9), rng)
    v = decide_automorphism(phi, max_period=12)
    assert replay(v, phi)
