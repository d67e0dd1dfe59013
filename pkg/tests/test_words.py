import random

import pytest
from hypothesis import given, settings, strategies as st

from iwip.words import (
    Automorphism, NotAnAutomorphism, WordError, are_conjugate, canonical_cyclic, cyclic_reduce,
    format_word, free_reduce, inner_automorphism, inner_conjugator, inverse, mod2_class, multiply,
    nielsen_reduce, parse_automorphism, parse_word,
)

from conftest import random_automorphism

letters = st.sampled_from([1, -1, 2, -2, 3, -3])
raw_words = st.lists(letters, max_size=12)


def test_free_reduce_cancels_adjacent_inverses():
    assert free_reduce([1, 2, -2, -1, 3]) == (3,)


def test_parse_and_format_round_trip():
    assert parse_word("abAB") == (1, 2, -1, -2)
    assert format_word(parse_word("aBcA")) == "aBcA"
    assert format_word(()) == "1"


def test_parse_rejects_junk():
    with pytest.raises(WordError):
        parse_word("a+b")


@given(raw_words)
def test_inverse_is_inverse(w):
    w = free_reduce(w)
    assert multiply(w, inverse(w)) == ()


@given(raw_words)
def test_cyclic_reduce_stays_conjugate(w):
    w = free_reduce(w)
    c = cyclic_reduce(w)
    assert are_conjugate(w, c)
    assert not c or c[0] != -c[-1]


def test_canonical_cyclic_is_rotation_invariant():
    w = parse_word("abAB")
    assert canonical_cyclic(w) == canonical_cyclic(parse_word("BabA"))


def test_mod2_class():
    assert mod2_class(parse_word("abAB"), 2) == (0, 0)
    assert mod2_class(parse_word("aab"), 2) == (0, 1)


def test_parse_automorphism_infers_rank():
    phi = parse_automorphism("a->b; b->c; c->ab")
    assert phi.rank == 3
    assert phi.format() == "a->b; b->c; c->ab"


def test_non_automorphism_reports_nielsen_stall():
    with pytest.raises(NotAnAutomorphism, match="Nielsen"):
        parse_automorphism("a->aa; b->b")


def test_nielsen_reduce_reaches_basis():
    ws, trace = nielsen_reduce([parse_word("ab"), parse_word("a")])
    assert sorted(map(len, ws)) == [1, 1]
    assert trace


def test_compose_applies_right_factor_first():
    phi = parse_automorphism("a->ab; b->b")
    psi = parse_automorphism("a->b; b->a")
    assert phi.compose(psi).format() == "a->b; b->ab"


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([2, 3]))
def test_inverse_automorphism(seed, rank):
    phi = random_automorphism(rank, 6, random.Random(seed))
    assert phi.compose(phi.inverse()).format() == Automorphism.identity(rank).format()


def test_inner_detection():
    g = parse_word("abA")
    chi = inner_automorphism(g, 2)
    assert chi.is_inner()
    assert inner_conjugator(chi) is not None
    assert not parse_automorphism("a->ab; b->a").is_inner()


def test_outer_equal_for_twisted_fibonacci():
    assert parse_automorphism("a->Babb; b->Bab").outer_equal(parse_automorphism("a->ab; b->a"))


@given(raw_words)
def test_print_parse_round_trip(w):
    w = free_reduce(w)
    assert parse_word(format_word(w)) == w
