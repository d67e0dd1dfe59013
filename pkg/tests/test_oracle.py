import pytest

from iwip.graphmap import rose_representative
from iwip.oracle import (
    EnumerationCap, brute_inps, cyclic_words, short_periodic_classes, whitehead_automorphisms, whitehead_primitivity,
)
from iwip.traintrack import bestvina_handel
from iwip.words import are_conjugate, parse_word

from conftest import FIBONACCI, TRIBONACCI_LIKE, aut


def test_cyclic_words_count_least_rotations():
    # necklaces of cyclically reduced words of length 2 in F_2: aa, ab, aB, AA, ... up to rotation
    words = list(cyclic_words(2, 2))
    assert len(words) == len(set(words))
    assert all(w[0] != -w[-1] for w in words)
    assert len(words) == 8


def test_fibonacci_periodic_classes_are_commutators():
    classes = short_periodic_classes(aut(FIBONACCI), 8, 4)
    assert classes
    for w in classes:
        assert are_conjugate(w, parse_word("abAB")) or are_conjugate(w, parse_word("baBA")) or len(w) == 8


def test_tribonacci_has_no_short_periodic_classes():
    assert short_periodic_classes(aut(TRIBONACCI_LIKE), 7, 6) == []


@pytest.mark.parametrize("word,expected", [("a", True), ("ab", True), ("aab", True), ("abAB", False), ("aabb", False)])
def test_primitivity(word, expected):
    assert whitehead_primitivity(parse_word(word), 2) is expected


def test_whitehead_moves_are_automorphisms():
    assert len(whitehead_automorphisms(2)) > 0


def test_brute_force_cap():
    f = bestvina_handel(rose_representative(aut("a->aba; b->ab"))).map
    with pytest.raises(EnumerationCap):
        brute_inps(f, 40, cap=50)
