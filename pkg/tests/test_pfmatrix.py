import math

import numpy as np
import pytest

from iwip.pfmatrix import (
    CountMatrix, bh_entry_bound, is_irreducible, is_permutation, is_primitive, pf_eigenvalue, pf_eigenvector,
)

GOLDEN = (1 + 5 ** 0.5) / 2


def test_fibonacci_eigenvalue():
    M = CountMatrix.of([[1, 1], [1, 0]])
    assert abs(pf_eigenvalue(M) - GOLDEN) < 1e-10
    v = pf_eigenvector(M)
    assert abs(v[0] / v[1] - GOLDEN) < 1e-8


def test_periodic_matrix_converges():
    # a permutation-like irreducible matrix with period 3
    M = CountMatrix.of([[0, 1, 0], [0, 0, 1], [1, 1, 0]])
    lam = pf_eigenvalue(M)
    assert abs(lam ** 3 - lam - 1) < 1e-9


def test_agrees_with_numpy_on_random_irreducible():
    rng = np.random.default_rng(3)
    for _ in range(20):
        A = rng.integers(0, 3, size=(4, 4))
        A[np.arange(4), (np.arange(4) + 1) % 4] += 1  # a cycle keeps it irreducible
        M = CountMatrix.of(A.tolist())
        ref = max(abs(np.linalg.eigvals(A.astype(float))))
        assert math.isclose(pf_eigenvalue(M), ref, rel_tol=1e-9)


def test_irreducibility_and_primitivity():
    assert is_irreducible(CountMatrix.of([[1, 1], [1, 0]]))[0]
    assert not is_irreducible(CountMatrix.of([[1, 1], [0, 1]]))[0]
    assert is_primitive(CountMatrix.of([[1, 1], [1, 0]]))
    assert not is_primitive(CountMatrix.of([[0, 1], [1, 0]]))


def test_permutation():
    assert is_permutation(CountMatrix.of([[0, 1], [1, 0]]))
    assert not is_permutation(CountMatrix.of([[1, 1], [1, 0]]))


def test_entry_bound_formula():
    assert bh_entry_bound(2, 2) == 3 * (2 * 2) ** 4


def test_rejects_negative_entries():
    with pytest.raises(ValueError):
        CountMatrix.of([[1, -1], [0, 1]])
