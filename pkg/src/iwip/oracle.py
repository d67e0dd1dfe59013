"""Brute-force cross-checks, only meant for small inputs."""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, product

from .graphmap import GraphMap, GraphPoint, PLPath, fixed_points, tighten_segments
from .nielsen import Leg, LegStart, NielsenPath, _canonical, _check_input
from .traintrack import gates, make_turn
from .words import Automorphism, Word, canonical_cyclic, cyclic_reduce

DEFAULT_CAP = 2 * 10**6


class EnumerationCap(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Nielsen paths by exhaustive search


def _starts(f: GraphMap) -> list[tuple[GraphPoint, int, Fraction]]:
    """(point, oriented edge, coordinate on it) for every fixed direction at a fixed point."""
    g = f.graph
    out = []
    for p in fixed_points(f):
        if p.is_vertex:
            for d in g.directions(p.vertex):
                img = f.image(d)
                if img and img[0] == d:
                    out.append((p, d, Fraction(0)))
            continue
        e, c = p.edge, p.coord
        img = f.edge_map[e]
        k = len(img)
        # the subinterval of e containing c is mapped onto img[i]
        i = int(c * k)
        if img[i] == e:
            out.append((p, e, c))
            out.append((p, -e, 1 - c))
    return out


def _starts_with(f: GraphMap, path: PLPath) -> bool:
    image = f.pl_image(path)
    n = len(path.segments)
    if image.start != path.start or len(image.segments) < n:
        return False
    head = image.segments[:n]
    if head[:-1] != path.segments[:-1]:
        return False
    e, a, b = head[-1]
    e0, a0, b0 = path.segments[-1]
    return e == e0 and a == a0 and b >= b0


def _legal_legs(f: GraphMap, leg_bound: int, cap: int) -> list[tuple[GraphPoint, PLPath]]:
    """Legal paths from fixed directions whose image starts with themselves.

    That condition is inherited by initial segments, so the search prunes there.
    """
    g = f.graph
    cls = gates(f)
    one = Fraction(1)
    legs = []
    count = 0
    for p, d, c in _starts(f):
        stack = [((d, c, one),)]
        while stack:
            segs = stack.pop()
            count += 1
            if count > cap:
                raise EnumerationCap(f"more than {cap} legal paths")
            path = PLPath(p, segs)
            if not _starts_with(f, path):
                continue
            legs.append((p, path))
            if len(segs) >= leg_bound:
                continue
            last = segs[-1][0]
            v = g.terminus(last)
            for nxt in g.directions(v):
                if nxt != -last and cls.legal(make_turn(-last, nxt)):
                    stack.append(segs + ((nxt, Fraction(0), one),))
    return legs


def brute_inps(f: GraphMap, leg_bound: int, cap: int = DEFAULT_CAP) -> list[NielsenPath]:
    """Every alpha beta^-1 from legs of length <= leg_bound that f fixes."""
    _check_input(f)
    g = f.graph
    legs = _legal_legs(f, leg_bound, cap)
    by_end: dict[int, list] = {}
    for p, path in legs:
        by_end.setdefault(g.terminus(path.segments[-1][0]), []).append((p, path))
    found = {}
    for v, items in by_end.items():
        for (p1, a), (p2, b) in combinations(items, 2):
            if a.segments[-1][0] == b.segments[-1][0]:
                continue
            segs = a.segments + b.inverse(g).segments
            eta = PLPath(p1, tighten_segments(segs))
            if len(eta.segments) != len(segs):
                continue
            if f.pl_image(eta) != eta:
                continue
            np_ = NielsenPath(Leg(LegStart(p1), a), Leg(LegStart(p2), b), v, 1, eta)
            c = _canonical(g, np_)
            found.setdefault(c.key(), c)
    return [found[k] for k in sorted(found)]


def inp_signature(f: GraphMap, paths) -> set:
    """Orientation-free exact encodings, for comparing two searches."""
    g = f.graph
    return {min(p.eta.key(), p.eta.inverse(g).key()) for p in paths}


# ---------------------------------------------------------------------------
# periodic conjugacy classes


def cyclic_words(rank: int, length: int):
    """Cyclically reduced words of exactly this length, least rotation only."""
    letters = [s * i for i in range(1, rank + 1) for s in (1, -1)]
    if length == 0:
        yield ()
        return

    def rec(prefix):
        if len(prefix) == length:
            if prefix[0] != -prefix[-1] and prefix == min(prefix[i:] + prefix[:i] for i in range(length)):
                yield prefix
            return
        for x in letters:
            if prefix and x == -prefix[-1]:
                continue
            if prefix and x < prefix[0]:
                continue  # a rotation starting with x would be smaller
            yield from rec(prefix + (x,))

    for x in letters:
        yield from rec((x,))


def short_periodic_classes(phi: Automorphism, len_bound: int, pow_bound: int, cap: int = DEFAULT_CAP) -> list[Word]:
    """Cyclic words of length <= len_bound whose class some phi^n (n <= pow_bound) fixes."""
    if pow_bound < 1:
        return []
    powers = [phi]
    for _ in range(pow_bound - 1):
        powers.append(phi.compose(powers[-1]))
    out = []
    count = 0
    for L in range(1, len_bound + 1):
        for w in cyclic_words(phi.rank, L):
            count += 1
            if count > cap:
                raise EnumerationCap(f"more than {cap} cyclic words")
            for psi in powers:
                img = cyclic_reduce(psi(w))
                if len(img) == L and canonical_cyclic(img) == w:
                    out.append(w)
                    break
    return out


# ---------------------------------------------------------------------------
# Whitehead minimisation


def whitehead_automorphisms(rank: int) -> list[Automorphism]:
    """Non-permutation Whitehead automorphisms (A, a) of F_rank."""
    letters = [s * i for i in range(1, rank + 1) for s in (1, -1)]
    out = []
    for a in letters:
        others = [x for x in letters if abs(x) != abs(a)]
        for mask in product((False, True), repeat=len(others)):
            A = {x for x, m in zip(others, mask) if m}
            if not A:
                continue
            imgs = []
            for i in range(1, rank + 1):
                if i == abs(a):
                    imgs.append((i,))
                    continue
                x = (i,)
                if i in A:
                    x = x + (a,)
                if -i in A:
                    x = (-a,) + x
                imgs.append(x)
            # the images are written for the generator a_i; a itself is fixed
            out.append(Automorphism(rank, tuple(imgs), validate=False))
    return out


def whitehead_primitivity(w: Word, rank: int | None = None) -> bool:
    """Is the cyclic word primitive?  Greedy Whitehead length reduction."""
    rank = rank if rank is not None else max((abs(x) for x in w), default=1)
    if rank > 3:
        raise ValueError("Whitehead enumeration is only provided up to rank 3")
    moves = whitehead_automorphisms(rank)
    cur = cyclic_reduce(w)
    if not cur:
        return False
    while True:
        if len(cur) == 1:
            return True
        for m in moves:
            nxt = cyclic_reduce(m(cur))
            if len(nxt) < len(cur):
                cur = nxt
                break
        else:
            return False
