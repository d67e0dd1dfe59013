"""Nonnegative integer matrices: irreducibility, primitivity, PF eigenvalue."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence


class ReducibleMatrix(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class CountMatrix:
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in r) for r in self.entries)
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("matrix must be square")
        if any(x < 0 for r in rows for x in r):
            raise ValueError("entries must be nonnegative")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def of(cls, rows: Sequence[Sequence[int]]) -> "CountMatrix":
        return cls(tuple(tuple(r) for r in rows))

    @property
    def n(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i][j]

    def norm(self) -> int:
        return max((x for r in self.entries for x in r), default=0)

    def total(self) -> int:
        return sum(sum(r) for r in self.entries)

    def __matmul__(self, other: "CountMatrix") -> "CountMatrix":
        n = self.n
        cols = list(zip(*other.entries))
        return CountMatrix(tuple(
            tuple(sum(a * b for a, b in zip(self.entries[i], cols[j])) for j in range(n))
            for i in range(n)
        ))

    def to_list(self) -> list[list[int]]:
        return [list(r) for r in self.entries]


def _reach(M: CountMatrix, start: int) -> set[int]:
    # j -> i whenever m_ij > 0: edge j's image crosses edge i
    seen = {start}
    stack = [start]
    while stack:
        j = stack.pop()
        for i in range(M.n):
            if M.entries[i][j] and i not in seen:
                seen.add(i)
                stack.append(i)
    return seen


def is_irreducible(M: CountMatrix) -> tuple[bool, frozenset[int]]:
    """Strong connectivity; otherwise a proper nonempty set closed under out-edges."""
    n = M.n
    if n == 0:
        return False, frozenset()
    best = None
    for j in range(n):
        r = _reach(M, j)
        if len(r) < n and (best is None or len(r) < len(best) or (len(r) == len(best) and sorted(r) < sorted(best))):
            best = r
    if best is None:
        return True, frozenset()
    return False, frozenset(best)


def is_primitive(M: CountMatrix) -> bool:
    n = M.n
    if n == 0:
        return False
    pattern = [[1 if x else 0 for x in r] for r in M.entries]
    P = [row[:] for row in pattern]
    for _ in range((n - 1) ** 2 + 1):
        if all(all(r) for r in P):
            return True
        P = [[1 if any(P[i][k] and pattern[k][j] for k in range(n)) else 0 for j in range(n)] for i in range(n)]
    return all(all(r) for r in P)


def is_permutation(M: CountMatrix) -> bool:
    return all(sorted(r) == [0] * (M.n - 1) + [1] for r in M.entries) and all(
        sorted(c) == [0] * (M.n - 1) + [1] for c in zip(*M.entries)
    )


def pf_eigenvalue(M: CountMatrix, tol: float = 1e-12, max_iter: int = 10**6) -> float:
    """Perron-Frobenius eigenvalue by power iteration.

    Iterating with ``(I + M)`` instead of ``M`` removes the periodicity of
    imprimitive matrices without moving the dominant eigenvector; the
    eigenvalue is then the Rayleigh quotient of ``M`` itself.
    """
    ok, _ = is_irreducible(M)
    if not ok:
        raise ReducibleMatrix("PF eigenvalue requested for a reducible matrix")
    if is_permutation(M):
        return 1.0
    lam, _ = _power_iteration(M, tol, max_iter)
    return lam


def pf_eigenvector(M: CountMatrix, tol: float = 1e-12, max_iter: int = 10**6) -> list[float]:
    """Positive right eigenvector normalised to sum 1."""
    ok, _ = is_irreducible(M)
    if not ok:
        raise ReducibleMatrix("PF eigenvector requested for a reducible matrix")
    if is_permutation(M):
        return [1.0 / M.n] * M.n
    return _power_iteration(M, tol, max_iter)[1]


def _power_iteration(M: CountMatrix, tol: float, max_iter: int) -> tuple[float, list[float]]:
    n = M.n
    A = [[float(x) for x in r] for r in M.entries]
    v = [1.0] * n
    prev = None
    stable = 0
    for _ in range(max_iter):
        Mv = [sum(A[i][k] * v[k] for k in range(n)) for i in range(n)]
        lam = sum(Mv[i] * v[i] for i in range(n)) / sum(x * x for x in v)
        w = [Mv[i] + v[i] for i in range(n)]
        s = sum(w)
        v = [x / s for x in w]
        if prev is not None and abs(lam - prev) < tol * max(1.0, abs(lam)):
            stable += 1
            if stable >= 3:
                return lam, v
        else:
            stable = 0
        prev = lam
    raise ConvergenceError(f"power iteration did not converge in {max_iter} rounds")


def bh_entry_bound(N: int, f0_norm: int) -> int:
    R = 3 * N - 3
    return R * (N * f0_norm) ** (R + 1)
