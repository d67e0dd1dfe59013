"""Gates, the train-track test, and the Bestvina-Handel loop.

All moves are combinatorial: a map is a graph plus tight edge-path images,
and every move replaces it by a homotopy-equivalent map on a new graph
while carrying the marking along.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from typing import Sequence

from .graphmap import (
    Graph,
    GraphMap,
    GraphMapError,
    GraphPoint,
    Marking,
    derivative_map,
    transition_matrix,
)
from .pfmatrix import (
    CountMatrix,
    bh_entry_bound,
    is_irreducible,
    pf_eigenvalue,
    pf_eigenvector,
)
from .whitehead import Turn, make_turn, taken_turns
from .words import Word, free_reduce, inverse

MAX_STEPS = 10**6


class IterationCapExceeded(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# gates


@dataclass(frozen=True)
class TurnClassification:
    gate_of: dict[int, int]
    gates: tuple[frozenset[int], ...]

    def legal(self, turn: Turn) -> bool:
        d1, d2 = turn
        return self.gate_of[d1] != self.gate_of[d2]


def gates(f: GraphMap) -> TurnClassification:
    """Directions are in one gate iff some iterate of Df identifies them."""
    df = derivative_map(f)
    dirs = f.graph.all_directions()
    cur = {d: d for d in dirs}
    # after #directions rounds every identification has happened
    for _ in range(len(dirs)):
        cur = {d: (df[x] if x else 0) for d, x in cur.items()}
    keys: dict = {}
    gate_of = {}
    for d in dirs:
        k = (f.graph.origin(d), cur[d]) if cur[d] else ("sink", d)
        gate_of[d] = keys.setdefault(k, len(keys))
    groups: dict[int, set[int]] = {}
    for d, g in gate_of.items():
        groups.setdefault(g, set()).add(d)
    return TurnClassification(gate_of, tuple(frozenset(groups[g]) for g in sorted(groups)))


def _dir_key(d: int):
    return (abs(d), d < 0)


def _turn_order(f: GraphMap, t: Turn):
    return (f.graph.origin(t[0]), tuple(sorted(map(_dir_key, t))))


def is_train_track(f: GraphMap) -> tuple[bool, Turn | None]:
    """True iff no taken turn is illegal; otherwise the least illegal one."""
    cls = gates(f)
    bad = [t for t in taken_turns(f) if not cls.legal(t)]
    if not bad:
        return True, None
    return False, min(bad, key=lambda t: _turn_order(f, t))


# ---------------------------------------------------------------------------
# elementary moves


def _rebuild(f: GraphMap, vertices, edges, names, vmap, emap, loops, base, entry) -> GraphMap:
    vnames = {v: f.graph.vertex_names[v] for v in vertices if v in f.graph.vertex_names}
    graph = Graph(tuple(sorted(vertices)), dict(sorted(edges.items())), vnames, names)
    marking = Marking(base, tuple(free_reduce(l) for l in loops), f.marking.names, ())
    emap = {e: free_reduce(w) for e, w in emap.items()}
    return GraphMap(graph, vmap, emap, marking, True, f.log + (entry,))


def tighten_map(f: GraphMap) -> GraphMap:
    emap = {e: free_reduce(w) for e, w in f.edge_map.items()}
    if emap == dict(f.edge_map):
        return f
    return GraphMap(f.graph, f.vertex_map, emap, f.marking, True, f.log + ("tighten",))


def subdivide_edge(f: GraphMap, e: int, p: GraphPoint | int) -> GraphMap:
    """Split ``e`` at a point that the standard map sends to a vertex.

    ``p`` is either such a point or the number of image edges covered by
    the first half.
    """
    if e <= 0 or e not in f.graph.edges:
        raise GraphMapError(f"no edge {e}")
    img = f.edge_map[e]
    n = len(img)
    if isinstance(p, GraphPoint):
        if p.is_vertex or p.edge != e:
            raise GraphMapError(f"{p} is not an interior point of edge {f.graph.edge_name(e)}")
        k = p.coord * n
        if k.denominator != 1:
            raise GraphMapError(f"{p} is not sent to a vertex")
        k = int(k)
    else:
        k = int(p)
    if not 0 < k < n:
        raise GraphMapError("subdivision point must be interior and sent to a vertex")
    g = f.graph
    o, t = g.edges[e]
    v = max(g.vertices) + 1
    e1, e2 = max(g.edges) + 1, max(g.edges) + 2

    def respell(w: Sequence[int]) -> Word:
        out = []
        for x in w:
            if x == e:
                out += [e1, e2]
            elif x == -e:
                out += [-e2, -e1]
            else:
                out.append(x)
        return tuple(out)

    edges = {x: g.edges[x] for x in g.edges if x != e}
    edges[e1], edges[e2] = (o, v), (v, t)
    names = {x: n_ for x, n_ in g.edge_names.items() if x != e}
    emap = {x: respell(w) for x, w in f.edge_map.items() if x != e}
    emap[e1], emap[e2] = respell(img[:k]), respell(img[k:])
    vmap = dict(f.vertex_map)
    vmap[v] = g.origin(img[k])
    loops = [respell(l) for l in f.marking.loops]
    entry = f"subdivide {g.edge_name(e)} at {Fraction(k, n)} into {e1},{e2}"
    return _rebuild(f, list(g.vertices) + [v], edges, names, vmap, emap, loops, f.marking.base, entry)


def _split_direction(f: GraphMap, d: int, k: int) -> tuple[GraphMap, int]:
    """Cut so the piece of ``d`` leaving its origin has image f(d)[:k]."""
    n = len(f.edge_map[abs(d)])
    if k == n:
        return f, d
    nxt = max(f.graph.edges) + 1
    if d > 0:
        return subdivide_edge(f, d, k), nxt
    return subdivide_edge(f, -d, n - k), -(nxt + 1)


def _common_prefix(u: Word, v: Word) -> int:
    k = 0
    while k < len(u) and k < len(v) and u[k] == v[k]:
        k += 1
    return k


def full_fold(f: GraphMap, d1: int, d2: int) -> GraphMap:
    """Identify two edges leaving the same vertex with equal images."""
    g = f.graph
    if abs(d1) == abs(d2) or g.origin(d1) != g.origin(d2):
        raise GraphMapError("full fold needs distinct edges at one vertex")
    if f.image(d1) != f.image(d2):
        raise GraphMapError("full fold needs equal images")
    t1, t2 = g.terminus(d1), g.terminus(d2)
    if t1 == t2:
        raise GraphMapError("fold would kill a loop: the map is not a homotopy equivalence")
    gone = abs(d2)
    sign = 1 if d2 > 0 else -1
    keep, drop = (t2, t1) if t1 == f.marking.base else (t1, t2)

    def vert(x: int) -> int:
        return keep if x == drop else x

    def proj(w: Sequence[int]) -> Word:
        return tuple(sign * d1 * (1 if x > 0 else -1) if abs(x) == gone else x for x in w)

    edges = {x: (vert(o), vert(t)) for x, (o, t) in g.edges.items() if x != gone}
    names = {x: n_ for x, n_ in g.edge_names.items() if x != gone}
    emap = {x: proj(w) for x, w in f.edge_map.items() if x != gone}
    vmap = {vert(v): vert(f.vertex_map[v]) for v in g.vertices if v != drop}
    loops = [proj(l) for l in f.marking.loops]
    entry = f"fold {g.edge_name(d2)} onto {g.edge_name(d1)}"
    verts = [v for v in g.vertices if v != drop]
    return _rebuild(f, verts, edges, names, vmap, emap, loops, vert(f.marking.base), entry)


def fold_turn(f: GraphMap, turn: Turn) -> GraphMap:
    """Fold the maximal initial segments of a turn whose images share a first edge."""
    d1, d2 = turn
    g = f.graph
    if g.origin(d1) != g.origin(d2) or d1 == d2:
        raise GraphMapError(f"{turn} is not a turn")
    i1, i2 = f.image(d1), f.image(d2)
    if not i1 or not i2 or i1[0] != i2[0]:
        raise GraphMapError(f"turn {turn} is not foldable")
    k = _common_prefix(i1, i2)
    if d1 == -d2:
        # both ends of one edge: cut off matching pieces at each end
        f = subdivide_edge(f, abs(d1), k)
        a, b = max(f.graph.edges) - 1, max(f.graph.edges)
        prefix = f.image(a)
        f = subdivide_edge(f, b, len(f.edge_map[b]) - len(prefix))
        c = max(f.graph.edges)
        return full_fold(f, a, -c)
    f, d1 = _split_direction(f, d1, k)
    # re-spelling may have changed lengths; cut d2 where d1's image ends
    f, d2 = _split_direction(f, d2, len(f.image(d1)))
    return full_fold(f, d1, d2)


def collapse_forest(f: GraphMap, forest: Sequence[int], reason: str = "collapse", keep: int | None = None) -> GraphMap:
    """Quotient by a forest; the map becomes pi . f . iota.

    ``keep`` names the vertex its tree retracts onto; pushing the wrong way
    would prepend the collapsed edge's image to its neighbours.
    """
    g = f.graph
    F = set(forest)
    parent = {v: v for v in g.vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in sorted(F):
        a, b = find(g.edges[e][0]), find(g.edges[e][1])
        if a == b:
            raise GraphMapError("edge set is not a forest")
        parent[b] = a
    comps: dict[int, list[int]] = {}
    for v in g.vertices:
        comps.setdefault(find(v), []).append(v)
    rep = {}
    for vs in comps.values():
        r = keep if keep in vs else min(vs)
        for v in vs:
            rep[v] = r
    fg = Graph(g.vertices, {e: g.edges[e] for e in F})
    to_rep = {v: fg.tree_path(F, v, rep[v]) if v != rep[v] else () for v in g.vertices}

    def proj(w: Sequence[int]) -> Word:
        return tuple(x for x in w if abs(x) not in F)

    edges = {e: (rep[o], rep[t]) for e, (o, t) in g.edges.items() if e not in F}
    names = {e: n_ for e, n_ in g.edge_names.items() if e not in F}
    emap = {}
    for e in edges:
        o, t = g.edges[e]
        lifted = inverse(to_rep[o]) + (e,) + to_rep[t]
        emap[e] = proj(f.path_image(lifted))
    verts = sorted(set(rep.values()))
    vmap = {v: rep[f.vertex_map[v]] for v in verts}
    loops = [proj(l) for l in f.marking.loops]
    entry = f"{reason} {{{','.join(g.edge_name(e) for e in sorted(F))}}}"
    return _rebuild(f, verts, edges, names, vmap, emap, loops, rep[f.marking.base], entry)


# ---------------------------------------------------------------------------
# normalization


def _closure(M: CountMatrix, j: int) -> set[int]:
    seen, stack = {j}, [j]
    while stack:
        c = stack.pop()
        for i in range(M.n):
            if M.entries[i][c] and i not in seen:
                seen.add(i)
                stack.append(i)
    return seen


def _is_forest(graph: Graph, edges: Sequence[int]) -> bool:
    parent: dict[int, int] = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            x = parent[x]
        return x

    for e in edges:
        a, b = find(graph.edges[e][0]), find(graph.edges[e][1])
        if a == b:
            return False
        parent[b] = a
    return True


def invariant_forest(f: GraphMap) -> list[int] | None:
    """Least f-invariant forest generated by a single edge, if any."""
    M = transition_matrix(f)
    edges = f.edges()
    best = None
    for j in range(M.n):
        cl = sorted(edges[i] for i in _closure(M, j))
        if _is_forest(f.graph, cl) and (best is None or (len(cl), cl) < (len(best), best)):
            best = cl
    return best


def _edge_lengths(f: GraphMap) -> dict[int, float]:
    """PF lengths (left eigenvector) when irreducible, else image lengths."""
    M = transition_matrix(f)
    edges = f.edges()
    if is_irreducible(M)[0]:
        Mt = CountMatrix(tuple(zip(*M.entries)))
        vec = pf_eigenvector(Mt)
        return {e: vec[i] for i, e in enumerate(edges)}
    return {e: float(len(f.edge_map[e])) for e in edges}


def _spectral_radius(f: GraphMap) -> float:
    M = transition_matrix(f)
    if is_irreducible(M)[0]:
        return pf_eigenvalue(M)
    return float(max(abs(z) for z in np.linalg.eigvals(np.array(M.entries, dtype=float))))


def _remove_valence_two(f: GraphMap, v: int) -> GraphMap:
    """Collapse one of the two edges at ``v``, whichever leaves the smaller
    stretch factor; ties go to the edge that is shorter in PF lengths."""
    g = f.graph
    lengths = _edge_lengths(f)
    options = []
    for d in g.directions(v):
        h = tighten_map(collapse_forest(f, [abs(d)], f"remove valence-2 vertex {g.vertex_name(v)} via", g.terminus(d)))
        options.append((round(_spectral_radius(h), 9), lengths[abs(d)], abs(d), h))
    return min(options, key=lambda o: o[:3])[3]


def normalize(f: GraphMap, valence_two: bool = True) -> GraphMap:
    """Tighten, collapse invariant forests, remove valence-1 and valence-2 vertices."""
    while True:
        f = tighten_map(f)
        forest = invariant_forest(f)
        if forest:
            f = collapse_forest(f, forest, "collapse invariant forest")
            continue
        g = f.graph
        low = [v for v in g.vertices if g.degree(v) == 1]
        if low:
            v = low[0]
            d = g.directions(v)[0]
            f = collapse_forest(f, [abs(d)], f"remove valence-1 vertex {g.vertex_name(v)} via", g.terminus(d))
            continue
        two = valence_two and [v for v in g.vertices if g.degree(v) == 2 and abs(g.directions(v)[0]) != abs(g.directions(v)[1])]
        if two:
            v = two[0]
            f = _remove_valence_two(f, v)
            continue
        return f


# ---------------------------------------------------------------------------
# the main loop


@dataclass
class TrainTrackOutcome:
    kind: str  # "TrainTrack" or "Reduction"
    map: GraphMap
    lam: float | None = None
    invariant_edges: tuple[int, ...] = ()
    free_factors: tuple[tuple[Word, ...], ...] = ()
    lambdas: list[float] = field(default_factory=list)
    entry_norms: list[int] = field(default_factory=list)
    folds: int = 0
    steps: int = 0
    violations: list[str] = field(default_factory=list)

    @property
    def is_train_track(self) -> bool:
        return self.kind == "TrainTrack"

    @property
    def log(self) -> tuple[str, ...]:
        return self.map.log


def invariant_subgraph_factors(f: GraphMap, S: Sequence[int]) -> tuple[tuple[Word, ...], ...]:
    """Bases, as F_N words, of the non-contractible components of a subgraph."""
    g = f.graph
    S = sorted(set(S))
    verts = sorted({v for e in S for v in g.edges[e]})
    sub = Graph(tuple(verts), {e: g.edges[e] for e in S})
    full_tree = f.reader.tree
    seen: set[int] = set()
    out = []
    for v in verts:
        if v in seen:
            continue
        tree = sub.spanning_tree(v)
        comp = {v} | {x for e in tree for x in g.edges[e]}
        seen |= comp
        cedges = [e for e in S if g.edges[e][0] in comp]
        if len(cedges) - len(comp) + 1 == 0:
            continue
        to_v = g.tree_path(full_tree, f.marking.base, v)
        basis = []
        for e in cedges:
            if e in tree:
                continue
            o, t = g.edges[e]
            loop = sub.tree_path(tree, v, o) + (e,) + sub.tree_path(tree, t, v)
            basis.append(f.reader.word(to_v + loop + inverse(to_v)))
        out.append(tuple(basis))
    return tuple(out)


def turn_depth(f: GraphMap, turn: Turn, df: dict[int, int] | None = None) -> int | None:
    """Least k with Df^k(turn) degenerate, or None for a legal turn."""
    df = df if df is not None else derivative_map(f)
    cur = turn
    for k in range(1, len(df) + 1):
        a, b = df[cur[0]], df[cur[1]]
        if not a or not b:
            return None
        if a == b:
            return k
        cur = make_turn(a, b)
    return None


def fold_candidate(f: GraphMap) -> tuple[int, int, int]:
    """Where the loop starts its next fold chain: ``(edge, position, depth)``.

    Among illegal turns crossed inside edge images, take the one Df
    degenerates soonest; ties go to the least turn, then edge, then position.
    """
    df = derivative_map(f)
    best = None
    for e in f.edges():
        img = f.edge_map[e]
        for j in range(1, len(img)):
            t = make_turn(-img[j - 1], img[j])
            k = turn_depth(f, t, df)
            if k is not None:
                key = (k, _turn_order(f, t), e, j)
                if best is None or key < best:
                    best = key
    if best is None:
        raise GraphMapError("no illegal turn in any edge image")
    return best[2], best[3], best[0]


def _refine(f: GraphMap, c: int) -> GraphMap:
    """Subdivide ``c`` so its image has at least two edges."""
    chain = [c]
    while len(f.edge_map[chain[-1]]) == 1:
        nxt = abs(f.edge_map[chain[-1]][0])
        if nxt in chain:
            raise GraphMapError("edges with one-edge images form an invariant cycle")
        chain.append(nxt)
    for e in reversed(chain):
        f = subdivide_edge(f, e, 1)
    return f


def _fold_avoiding(f: GraphMap, turn: Turn, avoid: int) -> tuple[GraphMap, bool]:
    """Fold ``turn`` without merging anything into vertex ``avoid``.

    Returns the new map and whether a fold happened (False after a
    refining subdivision).
    """
    d1, d2 = turn
    if d1 == -d2:
        return fold_turn(f, turn), True
    i1, i2 = f.image(d1), f.image(d2)
    g = f.graph
    k = _common_prefix(i1, i2)
    if any(k == len(f.image(d)) and g.terminus(d) == avoid for d in turn):
        if k == 1:
            return _refine(f, abs(i1[0])), False
        k -= 1
    f, d1 = _split_direction(f, d1, k)
    f, d2 = _split_direction(f, d2, len(f.image(d1)))
    return full_fold(f, d1, d2), True


def bestvina_handel(f0: GraphMap, tol: float = 1e-9, max_steps: int = MAX_STEPS) -> TrainTrackOutcome:
    bound = bh_entry_bound(f0.rank, f0.norm()) if f0.rank >= 2 else None
    start_action = f0.abelianized_action()
    lambdas: list[float] = []
    norms: list[int] = []
    violations: list[str] = []
    last_M = None
    folds = 0
    f = f0
    x = None  # valence-two vertex whose turn the current fold chain resolves
    for step in range(1, max_steps + 1):
        # a chain needs its subdivision vertex, so valence-2 cleanup waits
        before = len(f.log)
        f = normalize(f, valence_two=x is None)
        if x is not None and len(f.log) > before:
            # a collapse moved the chain's bookkeeping; start a fresh chain
            x = None
            continue
        M = transition_matrix(f)
        ok, cert = is_irreducible(M)
        if not ok:
            edges = f.edges()
            S = tuple(sorted(edges[i] for i in cert))
            if f.abelianized_action() != start_action:
                violations.append("abelianized action changed")
            return TrainTrackOutcome(
                "Reduction", f.with_log(f"reduction: invariant subgraph {{{','.join(f.graph.edge_name(e) for e in S)}}}"),
                None, S, invariant_subgraph_factors(f, S), lambdas, norms, folds, step, violations,
            )
        lam = pf_eigenvalue(M)
        if M != last_M:
            if lambdas and lam > lambdas[-1] + 2 * tol:
                violations.append(f"PF eigenvalue rose from {lambdas[-1]} to {lam}")
            lambdas.append(lam)
            norms.append(M.norm())
            if bound is not None and M.norm() > bound:
                violations.append(f"matrix entry {M.norm()} exceeds bound {bound}")
            last_M = M
        if x is None:
            tt, _ = is_train_track(f)
            if tt:
                if f.abelianized_action() != start_action:
                    violations.append("abelianized action changed")
                return TrainTrackOutcome("TrainTrack", f, lam, (), (), lambdas, norms, folds, step, violations)
        if x is None:
            e, j, _ = fold_candidate(f)
            x = max(f.graph.vertices) + 1
            f = subdivide_edge(f, e, j)
            continue
        depth = None
        if x in f.graph.vertices and f.graph.degree(x) == 2:
            depth = turn_depth(f, make_turn(*f.graph.directions(x)))
        if depth is None:
            # the chain dissolved (its vertex was absorbed); clean up and restart
            x = None
            continue
        df = derivative_map(f)
        turn = make_turn(*f.graph.directions(x))
        for _ in range(depth - 1):
            turn = make_turn(df[turn[0]], df[turn[1]])
        if depth == 1:
            f = fold_turn(f, turn)
            x = None
            folds += 1
        else:
            f, folded = _fold_avoiding(f, turn, x)
            folds += folded
    raise IterationCapExceeded(f"no train track or reduction after {max_steps} steps")
