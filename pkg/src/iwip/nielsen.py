"""Indivisible Nielsen paths, periodic ones, the graph they span, and atoroidality.

Periodic points are handled exactly: for a power n the affine pieces of the
true PL map f^n are enumerated and their fixed points solved in rationals.
Legs grow along eigenrays from those points.  Candidate pairs are matched by
hashing the growth of each leg under f^n, so images of length lambda^n are
never compared letter by letter, and every candidate is then confirmed by
iterating f exactly (``inp_check``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial, gcd
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .graphmap import (
    Graph, GraphMap, GraphMapError, GraphPoint, PLPath, derivative_map, tighten_segments, transition_matrix,
)
from .pfmatrix import is_irreducible, pf_eigenvalue
from .stallings import stallings_fold
from .words import Word, cyclic_reduce, mod2_class

_MOD = (1 << 61) - 1
_BASE = 1_000_003


class PeriodPolicyRefused(ValueError):
    pass


# ---------------------------------------------------------------------------
# period policies


@dataclass(frozen=True)
class LcmHeuristic:
    """Powers L, 2L, ..., multiplier*L where L is the lcm of Df-cycle lengths."""

    multiplier: int = 4


@dataclass(frozen=True)
class Explicit:
    n: int


@dataclass(frozen=True)
class FeighnHandel:
    cap: int = 10**6


PeriodPolicy = LcmHeuristic | Explicit | FeighnHandel


def parse_policy(text: str) -> PeriodPolicy:
    text = text.strip().lower()
    if text in ("lcm", "lcm-heuristic"):
        return LcmHeuristic()
    if text.startswith("lcm:"):
        return LcmHeuristic(int(text[4:]))
    if text.startswith("explicit:"):
        return Explicit(int(text[9:]))
    if text in ("feighn-handel", "fh"):
        return FeighnHandel()
    raise ValueError(f"unknown period policy {text!r}")


def landau(k: int) -> int:
    """Largest order of a permutation of k points."""
    best = [1] * (k + 1)
    for p in range(2, k + 1):
        if any(p % d == 0 for d in range(2, int(p ** 0.5) + 1)):
            continue
        nxt = best[:]
        q = p
        while q <= k:
            for s in range(q, k + 1):
                nxt[s] = max(nxt[s], best[s - q] * q)
            q *= p
        best = nxt
    return max(best)


def feighn_handel_power(rank: int, cap: int | None = None) -> int:
    """3^(r^2-1) * g(15r-15)!, refusing early once it passes ``cap``."""
    g = landau(15 * rank - 15)
    head = 3 ** (rank * rank - 1)
    if cap is not None:
        acc = head
        for i in range(2, g + 1):
            acc *= i
            if acc > cap:
                raise PeriodPolicyRefused(f"period bound for rank {rank} exceeds the cap {cap}")
        return acc
    return head * factorial(g)


def direction_cycle_lcm(f: GraphMap) -> int:
    df = derivative_map(f)
    L = 1
    for d in df:
        seen = {}
        x, i = d, 0
        while x and x not in seen:
            seen[x] = i
            x, i = df[x], i + 1
        if x == d:
            L = L * i // gcd(L, i)
    return L


def candidate_powers(f: GraphMap, policy: PeriodPolicy, max_period: int | None = None) -> list[int]:
    """Powers to search; a power dividing another one searched is skipped."""
    if isinstance(policy, Explicit):
        if policy.n < 1:
            raise ValueError("explicit period must be positive")
        wanted = [policy.n]
    elif isinstance(policy, FeighnHandel):
        cap = policy.cap if max_period is None else min(policy.cap, max_period)
        wanted = [feighn_handel_power(f.rank, cap)]
    else:
        L = direction_cycle_lcm(f)
        wanted = [k * L for k in range(1, policy.multiplier + 1)]
    if max_period is not None:
        wanted = [n for n in wanted if n <= max_period] or [min(max_period, min(wanted))]
    return sorted(n for n in set(wanted) if not any(m != n and m % n == 0 for m in wanted))


# ---------------------------------------------------------------------------
# exact powers and their fixed points


Piece = tuple[Fraction, Fraction, int]  # [s, t] of an edge goes affinely onto an oriented edge


def power_pieces(f: GraphMap, n: int) -> dict[int, list[Piece]]:
    """Affine pieces of f^n on every edge; assumes no cancellation (train tracks)."""
    one = Fraction(1)
    cur = {e: [(Fraction(0), one, e)] for e in f.edges()}
    for _ in range(n):
        nxt = {}
        for e in f.edges():
            img = f.edge_map[e]
            k = len(img)
            out = []
            for i, x in enumerate(img):
                lo, w = Fraction(i, k), Fraction(1, k)
                sub = cur[abs(x)] if x > 0 else [(one - t, one - s, -y) for s, t, y in reversed(cur[-x])]
                out.extend((lo + w * s, lo + w * t, y) for s, t, y in sub)
            nxt[e] = out
        cur = nxt
    return cur


def _vertex_power(f: GraphMap, n: int) -> dict[int, int]:
    out = {}
    for v in f.graph.vertices:
        w = v
        for _ in range(n):
            w = f.vertex_map[w]
        out[v] = w
    return out


def periodic_points(f: GraphMap, n: int, pieces: dict[int, list[Piece]] | None = None) -> list[GraphPoint]:
    """Exact fixed points of the PL map f^n."""
    pieces = pieces if pieces is not None else power_pieces(f, n)
    vp = _vertex_power(f, n)
    pts = [GraphPoint.at_vertex(v) for v in f.graph.vertices if vp[v] == v]
    for e, ps in pieces.items():
        for s, t, y in ps:
            if y == e:
                if t - s == 1:
                    raise GraphMapError(f"edge {f.graph.edge_name(e)} is fixed pointwise")
                x = s / (1 - (t - s))
            elif y == -e:
                x = t / (1 + t - s)
            else:
                continue
            if s < x < t:
                pts.append(GraphPoint.on_edge(e, x))
    return pts


def fixed_directions(f: GraphMap) -> list[int]:
    """Directions d at fixed vertices with Df(d) = d."""
    return [d for d in f.graph.all_directions()
            if f.vertex_map[f.graph.origin(d)] == f.graph.origin(d) and f.image(d) and f.image(d)[0] == d]


def eigenray_prefix(f: GraphMap, d: int, target: int) -> Word:
    if not f.image(d) or f.image(d)[0] != d:
        raise GraphMapError(f"direction {f.graph.edge_name(d)} is not fixed")
    ray: Word = (d,)
    while len(ray) < target:
        nxt = f.path_image(ray)
        if len(nxt) <= len(ray):
            raise GraphMapError("map is not expanding along this eigenray")
        ray = nxt
    return ray


# ---------------------------------------------------------------------------
# Nielsen paths


@dataclass(frozen=True)
class LegStart:
    """Start of a leg; interior points carry the f^k subdivision data.

    ``image`` spells f^k(edge), ``q`` is the 1-based index of the piece of f^k
    on ``edge`` that contains the point, and ``xi`` its coordinate on the
    positive edge.
    """

    point: GraphPoint
    power: int = 0
    image: Word = ()
    q: int | None = None

    @property
    def xi(self) -> Fraction | None:
        return None if self.point.is_vertex else self.point.coord

    def to_json(self, graph: Graph) -> dict:
        if self.point.is_vertex:
            return {"vertex": graph.vertex_name(self.point.vertex)}
        return {
            "edge": graph.edge_name(self.point.edge), "k": self.power,
            "image": [graph.edge_name(x) for x in self.image],
            "q": self.q, "xi": str(self.xi),
        }


@dataclass(frozen=True)
class Leg:
    start: LegStart
    path: PLPath  # legal PL path in the graph of f

    @property
    def edges(self) -> Word:
        return self.path.support()

    def __len__(self) -> int:
        return len(self.path.segments)


@dataclass(frozen=True)
class NielsenPath:
    alpha: Leg
    beta: Leg
    meeting: int
    period: int
    eta: PLPath = field(compare=False)

    @property
    def start(self) -> GraphPoint:
        return self.eta.start

    def end(self, graph: Graph) -> GraphPoint:
        return self.eta.end(graph)

    def key(self):
        return self.eta.key()

    def to_json(self, graph: Graph) -> dict:
        def segs(p: PLPath):
            return [[graph.edge_name(e), str(a), str(b)] for e, a, b in p.segments]

        return {
            "period": self.period, "meeting": graph.vertex_name(self.meeting),
            "alpha": {"start": self.alpha.start.to_json(graph), "path": segs(self.alpha.path)},
            "beta": {"start": self.beta.start.to_json(graph), "path": segs(self.beta.path)},
            "eta": segs(self.eta),
        }


def _flip(graph: Graph, p: NielsenPath) -> NielsenPath:
    return NielsenPath(p.beta, p.alpha, p.meeting, p.period, p.eta.inverse(graph))


def _canonical(graph: Graph, p: NielsenPath) -> NielsenPath:
    return min(p, _flip(graph, p), key=lambda x: x.key())


def inp_check(f: GraphMap, eta: NielsenPath | PLPath, n: int, max_segments: int | None = None) -> bool:
    """Does the tightened f^n-image of the path equal the path, endpoints included?

    With ``max_segments`` the iteration gives up (False) once an
    intermediate image grows past that many segments.
    """
    path = eta.eta if isinstance(eta, NielsenPath) else eta
    if n < 1 or path.is_trivial():
        return False
    p = path
    for _ in range(n):
        p = f.pl_image(p)
        if max_segments is not None and len(p.segments) > max_segments:
            return False
    return p == path


def paper_leg_bound(f: GraphMap) -> int:
    m = len(f.graph.edges)
    return m * f.norm() ** m + 4


def pf_leg_bound(f: GraphMap) -> int | None:
    """A leg bound that does not grow with the power searched.

    Cancellation at one illegal turn per application of f is at most
    m*||f|| edges; summed geometrically it stays below the growth
    (lambda^n - 1) * L(alpha) of the surviving tail unless the leg is short.
    """
    from .traintrack import _edge_lengths

    M = transition_matrix(f)
    if not is_irreducible(M)[0]:
        return None
    lam = pf_eigenvalue(M)
    if lam <= 1 + 1e-9:
        return None
    ell = _edge_lengths(f)
    lo, hi = min(ell.values()), max(ell.values())
    if lo <= 0:
        return None
    C = len(f.graph.edges) * f.norm() + 2
    return int(C * hi / (lo * (lam - 1))) + 3


def default_leg_bound(f: GraphMap) -> int:
    b = paper_leg_bound(f)
    pf = pf_leg_bound(f)
    return b if pf is None else min(b, pf)


class PowerImages:
    """Lengths, polynomial hashes and lazy letters of f^k(d) for k <= n.

    Hashes are little-endian, H(w) = sum w_i B^i, so that
    H(uv) = H(u) + B^|u| H(v).  Nothing of length |f^n(e)| is ever
    materialised except on request.
    """

    def __init__(self, f: GraphMap, n: int, prefix: int = 64):
        self.f = f
        self.n = n
        self.prefix_len = prefix
        dirs = f.graph.all_directions()
        self.img = {d: f.image(d) for d in dirs}
        self.lens = [{d: 1 for d in dirs}]
        self.hashes = [{d: d % _MOD for d in dirs}]
        self.pows = [{d: _BASE for d in dirs}]  # BASE ** len mod p
        self.prefixes = [{d: (d,) for d in dirs}]
        for k in range(n):
            L, H, P, F = {}, {}, {}, {}
            lk, hk, pk, fk = self.lens[k], self.hashes[k], self.pows[k], self.prefixes[k]
            for d in dirs:
                ln, h, pw = 0, 0, 1
                pre: list[int] = []
                for x in self.img[d]:
                    h = (h + pw * hk[x]) % _MOD
                    pw = pw * pk[x] % _MOD
                    ln += lk[x]
                    if len(pre) < prefix:
                        pre.extend(fk[x][:prefix - len(pre)])
                L[d], H[d], P[d], F[d] = ln, h, pw, tuple(pre)
            self.lens.append(L)
            self.hashes.append(H)
            self.pows.append(P)
            self.prefixes.append(F)

    def length(self, d: int, k: int | None = None) -> int:
        return self.lens[self.n if k is None else k][d]

    def letters(self, d: int, start: int, count: int, k: int | None = None) -> list[int]:
        """f^k(d)[start:start+count]."""
        k = self.n if k is None else k
        out: list[int] = []
        self._letters(d, k, start, count, out)
        return out

    def _letters(self, d: int, k: int, start: int, count: int, out: list[int]) -> None:
        if count <= 0:
            return
        pre = self.prefixes[k][d]
        if start + count <= len(pre):
            out.extend(pre[start:start + count])
            return
        if k == 0:
            if start == 0:
                out.append(d)
            return
        lens = self.lens[k - 1]
        for x in self.img[d]:
            ln = lens[x]
            if start >= ln:
                start -= ln
                continue
            before = len(out)
            self._letters(x, k - 1, start, count, out)
            count -= len(out) - before
            start = 0
            if count <= 0:
                return

    def suffix(self, d: int, start: int, k: int | None = None) -> tuple[int, int, int]:
        """(length, hash, BASE^length) of f^k(d)[start:]."""
        k = self.n if k is None else k
        if start == 0:
            return self.lens[k][d], self.hashes[k][d], self.pows[k][d]
        if k == 0:
            return 0, 0, 1
        lens, hs, pws = self.lens[k - 1], self.hashes[k - 1], self.pows[k - 1]
        img = self.img[d]
        for i, x in enumerate(img):
            if start >= lens[x]:
                start -= lens[x]
                continue
            ln, h, pw = self.suffix(x, start, k - 1)
            for y in img[i + 1:]:
                h = (h + pw * hs[y]) % _MOD
                pw = pw * pws[y] % _MOD
                ln += lens[y]
            return ln, h, pw
        return 0, 0, 1

    def tail(self, d: int, start: int, need: int) -> tuple[int, int, int, list[int]]:
        """Length, hash, BASE^length and first ``need`` letters of f^n(d)[start:]."""
        if start >= self.lens[self.n][d]:
            return 0, 0, 1, []
        path = []
        x, k = d, self.n
        while k > 0:
            lens = self.lens[k - 1]
            img = self.img[x]
            for i, y in enumerate(img):
                if start < lens[y]:
                    break
                start -= lens[y]
            path.append((img, i, k - 1))
            x, k = y, k - 1
        ln, h, pw = 1, x % _MOD, _BASE
        out = [x]
        for img, i, k in reversed(path):
            hs, pws, lens, pre = self.hashes[k], self.pows[k], self.lens[k], self.prefixes[k]
            for y in img[i + 1:]:
                h = (h + pw * hs[y]) % _MOD
                pw = pw * pws[y] % _MOD
                ln += lens[y]
                if len(out) < need:
                    out.extend(pre[y][:need - len(out)])
        return ln, h, pw, out[:need]

    def fixed_pieces(self, e: int):
        """Pieces of f^n on e that map onto e or its inverse.

        Yields (index, num, den, sign): the piece is [num/den, (num+1)/den].
        """
        out = []
        stack = [(e, self.n, 0, 0, 1)]
        counts = self._counts(abs(e))
        lens = self.lens
        while stack:
            x, k, offset, num, den = stack.pop()
            if k == 0:
                if abs(x) == abs(e):
                    out.append((offset, num, den, 1 if x == e else -1))
                continue
            img = self.img[x]
            c = counts[k - 1]
            m = len(img)
            off = offset
            for i, y in enumerate(img):
                if c[abs(y)]:
                    stack.append((y, k - 1, off, num * m + i, den * m))
                off += lens[k - 1][y]
        out.sort()
        return out

    @lru_cache(maxsize=None)
    def _counts(self, target: int) -> list[dict[int, int]]:
        """counts[k][e] = number of letters +-target in f^k(e)."""
        edges = self.f.edges()
        cur = {e: int(e == target) for e in edges}
        out = [cur]
        for _ in range(self.n):
            cur = {e: sum(out[-1][abs(x)] for x in self.f.edge_map[e]) for e in edges}
            out.append(cur)
        return out

    def vertex_map(self) -> dict[int, int]:
        return _vertex_power(self.f, self.n)

    def derivative(self) -> dict[int, int]:
        df = derivative_map(self.f)
        out = {}
        for d in df:
            x = d
            for _ in range(self.n):
                x = df[x] if x else 0
            out[d] = x
        return out


class _Ray(NamedTuple):
    edge: int  # oriented edge carrying the first (possibly partial) segment
    q: int  # 0-based index of the start's piece in f^n(edge)
    vertex: int | None  # start vertex, or None for an interior start
    num: int = 0  # interior start at num/den on the positive edge
    den: int = 1

    @property
    def start(self) -> GraphPoint:
        if self.vertex is not None:
            return GraphPoint.at_vertex(self.vertex)
        return GraphPoint.on_edge(abs(self.edge), Fraction(self.num, self.den))

    @property
    def coord(self) -> Fraction:
        """Coordinate of the start on the oriented edge."""
        if self.vertex is not None:
            return Fraction(0)
        x = Fraction(self.num, self.den)
        return x if self.edge > 0 else 1 - x


def _rays(P: PowerImages) -> list[_Ray]:
    f = P.f
    g = f.graph
    rays = []
    vp = P.vertex_map()
    dg = P.derivative()
    for v in g.vertices:
        if vp[v] != v:
            continue
        for d in g.directions(v):
            if dg[d] == d:
                rays.append(_Ray(d, 0, v))
    for e in f.edges():
        total = P.length(e)
        for offset, num, den, sign in P.fixed_pieces(e):
            if sign < 0:
                continue
            if den == 1:
                raise GraphMapError(f"edge {g.edge_name(e)} is fixed pointwise")
            # x = num/den + x/den, so x = num/(den-1)
            if num == 0 or num == den - 1:
                continue  # the fixed point is an endpoint
            rays.append(_Ray(e, offset, None, num, den - 1))
            rays.append(_Ray(-e, total - 1 - offset, None, num, den - 1))
    return rays


# Leg matching runs on numpy arrays.  Hashes use two 31-bit primes so that
# products fit in int64; candidates are always verified exactly afterwards.

_P1, _P2 = 2147483647, 2147483629
_CHUNK = 1 << 22  # legs hashed per batch


def _pow_table(base: int, mod: int, size: int) -> np.ndarray:
    out = np.empty(size, dtype=np.int64)
    x = 1
    for i in range(size):
        out[i] = x
        x = x * base % mod
    return out


class _Powers:
    """base**j mod p for 0 <= j < size, from two small tables."""

    def __init__(self, base: int, mod: int, size: int):
        self.mod = mod
        self.lo = _pow_table(base, mod, 1024)
        self.hi = _pow_table(pow(base, 1024, mod), mod, size // 1024 + 2)

    def __call__(self, j):
        j = np.asarray(j, dtype=np.int64)
        return self.hi[j >> 10] * self.lo[j & 1023] % self.mod


class _Images:
    """f^n(d) for every direction d as an int64 array, with hash data."""

    def __init__(self, P: PowerImages):
        f = P.f
        self.off = max(f.edges())
        width = max(len(img) for img in P.img.values())
        size = 2 * self.off + 1
        table = np.zeros((size, width), dtype=np.int64)
        ilen = np.zeros(size, dtype=np.int64)
        for d, img in P.img.items():
            table[d + self.off, :len(img)] = img
            ilen[d + self.off] = len(img)
        self.words: dict[int, np.ndarray] = {}
        for e in f.edges():
            w = np.array([e], dtype=np.int64)
            for _ in range(P.n):
                idx = w + self.off
                reps = ilen[idx]
                starts = np.repeat(np.cumsum(reps) - reps, reps)
                w = table[np.repeat(idx, reps), np.arange(int(reps.sum())) - starts]
            self.words[e] = w
            self.words[-e] = -w[::-1]
        longest = max(len(w) for w in self.words.values())
        self.tables = []
        for mod in (_P1, _P2):
            pw = _Powers(_BASE, mod, longest + 2)
            inv = _Powers(pow(_BASE, mod - 2, mod), mod, longest + 2)
            full, power, suffix = np.zeros(size, np.int64), np.zeros(size, np.int64), {}
            for d, w in self.words.items():
                terms = np.mod(w, mod) * pw(np.arange(len(w))) % mod
                rev = np.cumsum(terms[::-1])[::-1] % mod  # sum over j >= i
                suf = rev * inv(np.arange(len(w))) % mod
                suffix[d] = np.append(suf, 0)
                full[d + self.off] = suf[0]
                power[d + self.off] = int(pw(len(w)))
            self.tables.append((mod, full, power, suffix, inv))
        self.length = np.zeros(size, dtype=np.int64)
        for d, w in self.words.items():
            self.length[d + self.off] = len(w)


def _ray_letters(W: _Images, rays: Sequence[_Ray], bound: int) -> np.ndarray:
    """First ``bound`` letters of every eigenray, one row per ray."""
    out = np.zeros((len(rays), bound), dtype=np.int64)
    need = bound - 1
    for r, ray in enumerate(rays):
        out[r, 0] = ray.edge
        tail = W.words[ray.edge][ray.q + 1:ray.q + 1 + need]
        if len(tail) == need:
            out[r, 1:] = tail
            continue
        buf = tail.tolist()
        j = 0
        while len(buf) < need:
            buf.extend(W.words[buf[j]][:need - len(buf)].tolist())
            j += 1
        out[r, 1:] = buf
    return out


def _leg_fingerprints(W: _Images, rays: Sequence[_Ray], letters: np.ndarray, term: np.ndarray,
                      first: int = 0, total: int | None = None) -> np.ndarray:
    """fp[k - 1, r] is an int64 identifying (meeting vertex, |gamma|, gamma).

    gamma is defined by f^n(alpha) = alpha gamma where alpha is the first k
    edges of ray r.  Entries with empty gamma get distinct negative values;
    ``first`` and ``total`` place this batch of rays among all of them.
    """
    R, bound = letters.shape
    total = R if total is None else total
    edge = letters[:, 0]
    # S starts as the tail T of f^n(first edge) after the start's piece
    S_len = W.length[edge + W.off] - np.array([r.q + 1 for r in rays], dtype=np.int64)
    states = []
    for mod, full, power, suffix, inv in W.tables:
        h = np.array([suffix[r.edge][r.q + 1] for r in rays], dtype=np.int64)
        pw = _Powers(_BASE, mod, int(S_len.max()) + 2)(S_len)
        states.append([h, pw, mod, full, power, inv, 0, 1])
    fp = np.empty((bound, R), dtype=np.int64)
    cols = np.ascontiguousarray(letters.T)
    cur_len = S_len
    mul_len, mul_v = np.uint64(0x9E3779B97F4A7C15), np.uint64(0xC2B2AE3D27D4EB4F)
    for k in range(1, bound + 1):
        x = cols[k - 1]
        idx = x + W.off
        if k > 1:
            cur_len = cur_len + W.length[idx]
            for st in states:
                h, pw, mod, full, power, inv, pre, ppw = st
                st[0] = (h + pw * full[idx]) % mod
                st[1] = pw * power[idx] % mod
                st[6] = (pre + ppw * np.mod(x, mod)) % mod
                st[7] = ppw * _BASE % mod
        gamma_len = cur_len - (k - 1)
        (h1, _, m1, _, _, inv1, pre1, _), (h2, _, m2, _, _, inv2, pre2, _) = states
        g1 = (h1 - pre1) % m1 * int(inv1(k - 1)) % m1
        g2 = (h2 - pre2) % m2 * int(inv2(k - 1)) % m2
        mix = gamma_len.astype(np.uint64) * mul_len + term[idx].astype(np.uint64) * mul_v
        row = ((g1 * (1 << 31) + g2).astype(np.uint64) ^ mix).view(np.int64)
        empty = gamma_len <= 0
        if empty.any():
            row = row.copy()
            row[empty] = -1 - ((k - 1) * total + first + np.flatnonzero(empty))
        fp[k - 1] = row
    return fp


def _candidate_pairs(fp: np.ndarray, last: np.ndarray) -> list[tuple[int, int]]:
    """Flat index pairs with equal fingerprints and different last edges."""
    flat = fp.ravel()
    last = last.ravel()
    order = np.argsort(flat)
    sf = flat[order]
    eq = sf[1:] == sf[:-1]
    if not eq.any():
        return []
    # runs of length two are the common case and are filtered in bulk
    prev_eq = np.r_[False, eq[:-1]]
    next_eq = np.r_[eq[1:], False]
    pair_at = np.flatnonzero(eq & ~prev_eq & ~next_eq)
    u, v = order[pair_at], order[pair_at + 1]
    keep = last[u] != last[v]
    out = list(zip(u[keep].tolist(), v[keep].tolist()))
    for s0 in np.flatnonzero(eq & ~prev_eq & next_eq):
        s1 = s0 + 1
        while s1 < len(sf) and sf[s1] == sf[s0]:
            s1 += 1
        members = order[s0:s1].tolist()
        for x in range(len(members)):
            for y in range(x + 1, len(members)):
                if last[members[x]] != last[members[y]]:
                    out.append((members[x], members[y]))
    return out


def _leg_path(ray: _Ray, letters: Sequence[int], k: int) -> PLPath:
    one = Fraction(1)
    segs = [(ray.edge, ray.coord, one)] + [(x, Fraction(0), one) for x in letters[1:k]]
    return PLPath(ray.start, tuple(segs))


def _leg_start(P: PowerImages, W: _Images, ray: _Ray) -> LegStart:
    if ray.start.is_vertex:
        return LegStart(ray.start)
    e = ray.start.edge
    q = ray.q + 1 if ray.edge > 0 else P.length(e) - ray.q
    return LegStart(ray.start, P.n, tuple(W.words[e].tolist()), q)


def _inps_of_power(f: GraphMap, n: int, bound: int) -> list[NielsenPath]:
    P = PowerImages(f, n, bound + 1)
    g = f.graph
    rays = _rays(P)
    if not rays:
        return []
    W = _Images(P)
    term = np.zeros(2 * W.off + 1, dtype=np.int64)
    for d in g.all_directions():
        term[d + W.off] = g.terminus(d)
    found = []
    cap = 2 * bound + 4
    per_chunk = max(1, _CHUNK // bound)
    letters = _ray_letters(W, rays, bound)
    R = len(rays)
    fp = np.concatenate([_leg_fingerprints(W, rays[c:c + per_chunk], letters[c:c + per_chunk], term, c, R)
                         for c in range(0, R, per_chunk)], axis=1)
    for u, v in _candidate_pairs(fp, letters.T):
        (i, r1), (j, r2) = divmod(u, R), divmod(v, R)
        i, j = i + 1, j + 1
        l1, l2 = letters[r1].tolist(), letters[r2].tolist()
        if g.terminus(l1[i - 1]) != g.terminus(l2[j - 1]):
            continue
        a = _leg_path(rays[r1], l1, i)
        b = _leg_path(rays[r2], l2, j)
        eta = PLPath(a.start, tighten_segments(a.segments + b.inverse(g).segments))
        if len(eta.segments) != len(a.segments) + len(b.segments) or eta.end(g) != b.start:
            continue
        if not inp_check(f, eta, n, cap):
            continue
        alpha = Leg(_leg_start(P, W, rays[r1]), a)
        beta = Leg(_leg_start(P, W, rays[r2]), b)
        found.append(NielsenPath(alpha, beta, g.terminus(l1[i - 1]), n, eta))
    return found


def _check_input(f: GraphMap) -> None:
    from .traintrack import is_train_track

    if not f.standard:
        raise GraphMapError("Nielsen path search needs a standard map")
    ok, witness = is_train_track(f)
    if not ok:
        raise GraphMapError(f"not a train track map (illegal taken turn {witness})")
    if pf_leg_bound(f) is None:
        raise GraphMapError("map is not expanding and irreducible")


def _dedupe(f: GraphMap, paths: Iterable[NielsenPath]) -> list[NielsenPath]:
    seen = {}
    for p in paths:
        c = _canonical(f.graph, p)
        seen.setdefault(c.key(), c)
    return [seen[k] for k in sorted(seen)]


def find_inps(f: GraphMap, leg_bound: int | None = None) -> list[NielsenPath]:
    """All indivisible Nielsen paths of period one, one orientation each."""
    _check_input(f)
    bound = default_leg_bound(f) if leg_bound is None else leg_bound
    return _dedupe(f, _inps_of_power(f, 1, bound))


DEFAULT_PIECE_BUDGET = 2 * 10**5


@dataclass(frozen=True)
class PinpSearch:
    pinps: tuple[NielsenPath, ...]
    powers: tuple[int, ...]
    skipped: tuple[int, ...]
    leg_bound: int
    policy: PeriodPolicy

    @property
    def complete_for_policy(self) -> bool:
        return not self.skipped


def find_pinps(f: GraphMap, policy: PeriodPolicy | None = None, max_period: int | None = None,
               leg_bound: int | None = None, budget: int = DEFAULT_PIECE_BUDGET) -> PinpSearch:
    """Periodic INPs found among the INPs of the searched powers, with minimal periods.

    A power whose images would exceed ``budget`` edges in total is skipped
    and reported.
    """
    _check_input(f)
    policy = policy if policy is not None else LcmHeuristic()
    powers = candidate_powers(f, policy, max_period)
    bound = leg_bound if leg_bound is not None else default_leg_bound(f)
    found: dict = {}
    searched, skipped = [], []
    lens = {e: 1 for e in f.edges()}
    for n in powers:
        lens = {e: 1 for e in f.edges()}
        for _ in range(n):
            lens = {e: sum(lens[abs(x)] for x in f.edge_map[e]) for e in f.edges()}
            if sum(lens.values()) > budget:
                break
        if sum(lens.values()) > budget:
            skipped.append(n)
            continue
        searched.append(n)
        for p in _inps_of_power(f, n, bound):
            c = _canonical(f.graph, p)
            if c.key() in found:
                continue
            period = next(k for k in range(1, n + 1) if n % k == 0 and inp_check(f, c, k))
            found[c.key()] = NielsenPath(c.alpha, c.beta, c.meeting, period, c.eta)
    out = tuple(found[k] for k in sorted(found))
    return PinpSearch(out, tuple(searched), tuple(skipped), bound, policy)


# ---------------------------------------------------------------------------
# the graph of periodic Nielsen paths


@dataclass(frozen=True)
class NielsenGraph:
    vertices: tuple[GraphPoint, ...]
    edges: tuple[tuple[int, int, NielsenPath], ...]

    def components(self) -> list[tuple[list[int], list[int]]]:
        """(vertex indices, edge indices) per connected component."""
        parent = list(range(len(self.vertices)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for o, t, _ in self.edges:
            parent[find(o)] = find(t)
        comps: dict[int, tuple[list[int], list[int]]] = {}
        for v in range(len(self.vertices)):
            comps.setdefault(find(v), ([], []))[0].append(v)
        for i, (o, _, _) in enumerate(self.edges):
            comps[find(o)][1].append(i)
        return [comps[k] for k in sorted(comps)]

    def betti(self) -> int:
        return len(self.edges) - len(self.vertices) + len(self.components())


def nielsen_graph(pinps: Iterable[NielsenPath], graph: Graph | None = None) -> NielsenGraph:
    pinps = list(pinps)
    ends = set()
    pairs = []
    for p in pinps:
        o = p.eta.start
        t = p.eta.end(graph) if graph is not None else _end_point(p)
        ends.update((o, t))
        pairs.append((o, t, p))
    verts = tuple(sorted(ends, key=GraphPoint.sort_key))
    idx = {v: i for i, v in enumerate(verts)}
    return NielsenGraph(verts, tuple((idx[o], idx[t], p) for o, t, p in pairs))


def _end_point(p: NielsenPath) -> GraphPoint:
    return p.beta.start.point


def _closed_word(f: GraphMap, base: GraphPoint, path: PLPath) -> Word:
    if base.is_vertex:
        segs = path.segments
    else:
        e, c = base.edge, base.coord
        segs = ((e, Fraction(0), c),) + path.segments + ((-e, 1 - c, Fraction(1)),)
    segs = tighten_segments(segs)
    edge_path = []
    for e, a, b in segs:
        if (a, b) != (0, 1):
            raise GraphMapError("closed path did not tighten to an edge path")
        edge_path.append(e)
    return f.reader.word(edge_path)


def component_subgroups(S: NielsenGraph, f: GraphMap) -> list[list[Word]]:
    """Free bases of the subgroups carried by the non-contractible components."""
    g = f.graph
    out = []
    for verts, edge_ids in S.components():
        if len(edge_ids) - len(verts) + 1 <= 0:
            continue
        root = verts[0]
        to_root: dict[int, PLPath] = {root: PLPath(S.vertices[root], ())}
        tree = set()
        frontier = [root]
        while frontier:
            nxt = []
            for v in frontier:
                for i in edge_ids:
                    o, t, p = S.edges[i]
                    for a, b, path in ((o, t, p.eta), (t, o, p.eta.inverse(g))):
                        if a == v and b not in to_root:
                            to_root[b] = PLPath(S.vertices[root], tighten_segments(to_root[a].segments + path.segments))
                            tree.add(i)
                            nxt.append(b)
            frontier = nxt
        gens = []
        for i in edge_ids:
            if i in tree:
                continue
            o, t, p = S.edges[i]
            loop = to_root[o].segments + p.eta.segments + to_root[t].inverse(g).segments
            w = _closed_word(f, S.vertices[root], PLPath(S.vertices[root], tighten_segments(loop)))
            if w:
                gens.append(w)
        basis = stallings_fold(gens).free_basis() if gens else []
        if basis:
            out.append(basis)
    return out


# ---------------------------------------------------------------------------
# atoroidality


@dataclass(frozen=True)
class Atoroidality:
    value: bool
    witness: Word | None
    search: PinpSearch
    subgroups: tuple[tuple[Word, ...], ...]


def _subgroups(f: GraphMap, search: PinpSearch) -> list[list[Word]]:
    return component_subgroups(nielsen_graph(search.pinps, f.graph), f)


def is_atoroidal(f: GraphMap, policy: PeriodPolicy | None = None, search: PinpSearch | None = None,
                 max_period: int | None = None) -> Atoroidality:
    search = search if search is not None else find_pinps(f, policy, max_period)
    subs = _subgroups(f, search)
    witness = cyclic_reduce(subs[0][0]) if subs else None
    return Atoroidality(not subs, witness, search, tuple(tuple(s) for s in subs))


def is_primitively_atoroidal(f: GraphMap, policy: PeriodPolicy | None = None, search: PinpSearch | None = None,
                             max_period: int | None = None) -> Atoroidality:
    """True iff every component subgroup dies in H_1(F_N; Z/2)."""
    search = search if search is not None else find_pinps(f, policy, max_period)
    subs = _subgroups(f, search)
    for basis in subs:
        for w in basis:
            if any(mod2_class(w, f.rank)):
                return Atoroidality(False, cyclic_reduce(w), search, tuple(tuple(s) for s in subs))
    return Atoroidality(True, None, search, tuple(tuple(s) for s in subs))
