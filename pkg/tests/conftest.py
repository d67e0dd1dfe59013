import random

import pytest

from iwip.bench import load_generators, random_walk
from iwip.decide import compose_word
from iwip.words import Automorphism

FIBONACCI = "a->ab; b->a"
TWISTED_FIBONACCI = "a->Babb; b->Bab"
TRIBONACCI_LIKE = "a->b; b->c; c->ab"


def aut(text: str) -> Automorphism:
    return Automorphism.parse(text)


def random_automorphism(rank: int, length: int, rng: random.Random) -> Automorphism:
    gens = load_generators(None, rank)
    return compose_word(random_walk(gens, length, rng), gens, rank)


@pytest.fixture
def fib():
    return aut(FIBONACCI)
