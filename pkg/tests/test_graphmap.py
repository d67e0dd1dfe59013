import random
from fractions import Fraction

import pytest

from iwip.graphmap import (
    GraphMapError, GraphPoint, derivative_map, fixed_points, from_json, gamma_prime, iterate_image, power_map,
    rose_representative, subdivide_at, to_json, transition_matrix,
)
from iwip.traintrack import bestvina_handel
from iwip.words import Automorphism

from conftest import FIBONACCI, aut, random_automorphism


def test_rose_representative_induces_phi(fib):
    f = rose_representative(fib)
    assert f.induced_automorphism().outer_equal(fib)
    assert f.norm() == 2
    assert f.standard


def test_transition_matrix_columns_count_images():
    f = rose_representative(aut(FIBONACCI))
    assert transition_matrix(f).to_list() == [[1, 1], [1, 0]]


def test_derivative_map():
    f = rose_representative(aut(FIBONACCI))
    assert derivative_map(f) == {1: 1, -1: -2, 2: 1, -2: -1}


def test_power_map_matches_automorphism_power():
    phi = aut(FIBONACCI)
    f3 = power_map(rose_representative(phi), 3)
    assert f3.induced_automorphism().outer_equal(phi.power(3))


def test_iterate_image_lengths_grow():
    f = rose_representative(aut(FIBONACCI))
    assert [len(iterate_image(f, (1,), t)) for t in range(1, 6)] == [2, 3, 5, 8, 13]


def test_fibonacci_has_one_fixed_point():
    assert fixed_points(rose_representative(aut(FIBONACCI))) == [GraphPoint.at_vertex(0)]


def test_interior_fixed_point_and_subdivision():
    f = rose_representative(aut("a->bab; b->ba"))
    pts = fixed_points(f)
    inner = [p for p in pts if not p.is_vertex]
    assert inner == [GraphPoint.on_edge(1, Fraction(1, 2))]
    for p in inner:
        assert f.point_image(p) == p
    g = subdivide_at(f, inner)
    assert len(g.graph.edges) == len(f.graph.edges) + len(inner)
    assert g.induced_automorphism().outer_equal(f.induced_automorphism())


def test_point_image_is_exact():
    f = rose_representative(aut(FIBONACCI))
    p = GraphPoint.on_edge(1, Fraction(1, 3))
    q = f.point_image(p)
    assert q == GraphPoint.on_edge(1, Fraction(2, 3))


@pytest.mark.parametrize("seed", range(10))
def test_gamma_prime_norm_bound(seed):
    rng = random.Random(seed)
    phi = random_automorphism(rng.choice([2, 3]), rng.randint(2, 8), rng)
    out = bestvina_handel(rose_representative(phi))
    if out.kind != "TrainTrack":
        return
    f = out.map
    fp = gamma_prime(f)
    assert fp.norm() <= f.norm() ** 2
    assert len(fixed_points(f)) <= 2 * len(f.graph.edges) * f.norm()
    assert fp.induced_automorphism().outer_equal(phi)


def test_json_round_trip_is_exact():
    f = bestvina_handel(rose_representative(aut("a->Babb; b->Bab"))).map
    text = to_json(f)
    assert to_json(from_json(text)) == text


def test_json_rejects_signed_edge_ids():
    bad = '{"graph": {"vertices": ["v"], "edges": [{"id": "-a", "from": "v", "to": "v"}]}, "map": {}, "marking": {}}'
    with pytest.raises(GraphMapError):
        from_json(bad)


def test_identity_is_not_expanding():
    f = rose_representative(Automorphism.identity(2))
    assert f.norm() == 1
