"""Marked graphs, standard PL graph maps, and exact PL paths.

Edges are positive ints; a signed int is an oriented edge.  A graph map
stores the image edge-path of every positive edge.  Unless ``standard`` is
False, the map is read as the standard PL map: the i-th of the n equal
subintervals of an edge goes affinely onto the i-th image edge.  Points
inside edges carry exact ``Fraction`` coordinates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from math import floor
from typing import Iterable, Mapping, Sequence

from .pfmatrix import CountMatrix
from .stallings import basis_inverse
from .words import LETTERS, Automorphism, Word, free_reduce, inverse, multiply


class GraphMapError(ValueError):
    pass


# ---------------------------------------------------------------------------
# graphs and markings


@dataclass(frozen=True)
class Graph:
    vertices: tuple[int, ...]
    edges: Mapping[int, tuple[int, int]]
    vertex_names: Mapping[int, str] = field(default_factory=dict, compare=False)
    edge_names: Mapping[int, str] = field(default_factory=dict, compare=False)

    def origin(self, e: int) -> int:
        o, t = self.edges[abs(e)]
        return o if e > 0 else t

    def terminus(self, e: int) -> int:
        o, t = self.edges[abs(e)]
        return t if e > 0 else o

    @cached_property
    def _directions(self) -> dict[int, list[int]]:
        dirs: dict[int, list[int]] = {v: [] for v in self.vertices}
        for e, (o, t) in self.edges.items():
            dirs[o].append(e)
            dirs[t].append(-e)
        for v in dirs:
            dirs[v].sort(key=lambda d: (abs(d), d < 0))
        return dirs

    def directions(self, v: int) -> list[int]:
        return self._directions[v]

    def all_directions(self) -> list[int]:
        return [d for e in sorted(self.edges) for d in (e, -e)]

    def degree(self, v: int) -> int:
        return len(self._directions[v])

    def betti(self) -> int:
        return len(self.edges) - len(self.vertices) + self.components()

    def components(self) -> int:
        parent = {v: v for v in self.vertices}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for o, t in self.edges.values():
            parent[find(o)] = find(t)
        return len({find(v) for v in self.vertices})

    def edge_name(self, e: int) -> str:
        name = self.edge_names.get(abs(e), str(abs(e)))
        return name if e > 0 else "-" + name

    def vertex_name(self, v: int) -> str:
        return self.vertex_names.get(v, str(v))

    def is_edge_path(self, path: Sequence[int]) -> bool:
        return all(self.terminus(x) == self.origin(y) for x, y in zip(path, path[1:]))

    def spanning_tree(self, root: int) -> list[int]:
        seen = {root}
        tree = []
        frontier = [root]
        while frontier:
            nxt = []
            for v in frontier:
                for d in self.directions(v):
                    w = self.terminus(d)
                    if w not in seen:
                        seen.add(w)
                        tree.append(abs(d))
                        nxt.append(w)
            frontier = nxt
        return tree

    def tree_path(self, tree: Iterable[int], u: int, v: int) -> Word:
        """Edge path from u to v inside the given tree."""
        tree = set(tree)
        prev: dict[int, tuple[int, int] | None] = {u: None}
        frontier = [u]
        while frontier and v not in prev:
            nxt = []
            for x in frontier:
                for d in self.directions(x):
                    if abs(d) in tree and self.terminus(d) not in prev:
                        prev[self.terminus(d)] = (x, d)
                        nxt.append(self.terminus(d))
            frontier = nxt
        if v not in prev:
            raise GraphMapError(f"no tree path from {u} to {v}")
        path = []
        while prev[v] is not None:
            x, d = prev[v]
            path.append(d)
            v = x
        return tuple(reversed(path))


@dataclass(frozen=True)
class Marking:
    """Generator loops at ``base`` identifying F_N with pi_1 of the graph."""

    base: int
    loops: tuple[Word, ...]
    names: tuple[str, ...]
    tree: tuple[int, ...] = ()

    @property
    def rank(self) -> int:
        return len(self.loops)


class MarkedReader:
    """Translate closed edge paths of a marked graph into words of F_N."""

    def __init__(self, graph: Graph, marking: Marking):
        self.graph = graph
        self.marking = marking
        tree = set(marking.tree) if marking.tree else set(graph.spanning_tree(marking.base))
        if marking.tree and len(tree) != len(graph.vertices) - 1:
            tree = set(graph.spanning_tree(marking.base))
        self.tree = tree
        others = [e for e in sorted(graph.edges) if e not in tree]
        if len(others) != marking.rank:
            raise GraphMapError("marking rank does not match the graph's first Betti number")
        self.letter = {e: i + 1 for i, e in enumerate(others)}
        in_x = [self._read(loop) for loop in marking.loops]
        self.to_fn = basis_inverse(in_x, marking.rank)

    def _read(self, path: Sequence[int]) -> Word:
        out = []
        for d in path:
            if abs(d) in self.letter:
                out.append(self.letter[abs(d)] * (1 if d > 0 else -1))
        return free_reduce(out)

    def word(self, closed_path: Sequence[int]) -> Word:
        """F_N word of a closed path; conjugated to the base through the tree."""
        pieces = []
        for x in self._read(closed_path):
            img = self.to_fn[abs(x) - 1]
            pieces.append(img if x > 0 else inverse(img))
        return multiply(*pieces)


# ---------------------------------------------------------------------------
# points and PL paths


@dataclass(frozen=True, order=True)
class GraphPoint:
    """A vertex (``edge`` is None) or an interior point of a positive edge."""

    vertex: int | None = None
    edge: int | None = None
    coord: Fraction | None = None

    def __post_init__(self):
        if self.edge is not None:
            c = Fraction(self.coord)
            if not 0 < c < 1 or self.edge <= 0:
                raise GraphMapError("interior point needs a positive edge and 0 < coord < 1")
            object.__setattr__(self, "coord", c)

    @classmethod
    def at_vertex(cls, v: int) -> "GraphPoint":
        return cls(vertex=v)

    @classmethod
    def on_edge(cls, e: int, c) -> "GraphPoint":
        return cls(edge=e, coord=Fraction(c))

    @property
    def is_vertex(self) -> bool:
        return self.edge is None

    def sort_key(self):
        return (0, self.vertex, 0) if self.is_vertex else (1, self.edge, self.coord)

    def __repr__(self):
        if self.is_vertex:
            return f"v{self.vertex}"
        return f"e{self.edge}@{self.coord}"


def point_on(graph: Graph, e: int, c: Fraction) -> GraphPoint:
    """Point at coordinate ``c`` of the oriented edge ``e``."""
    if c == 0:
        return GraphPoint.at_vertex(graph.origin(e))
    if c == 1:
        return GraphPoint.at_vertex(graph.terminus(e))
    return GraphPoint.on_edge(e, c) if e > 0 else GraphPoint.on_edge(-e, 1 - c)


Segment = tuple[int, Fraction, Fraction]


@dataclass(frozen=True)
class PLPath:
    """A PL path: a start point and segments ``(oriented edge, a, b)`` with a < b.

    Tight paths are stored with segments merged across interior points, so
    equality of tight paths is equality of this representation.
    """

    start: GraphPoint
    segments: tuple[Segment, ...]

    def is_trivial(self) -> bool:
        return not self.segments

    def end(self, graph: Graph) -> GraphPoint:
        if not self.segments:
            return self.start
        e, _, b = self.segments[-1]
        return point_on(graph, e, b)

    def support(self) -> Word:
        """Simplicial support as an edge path."""
        return tuple(e for e, _, _ in self.segments)

    def __len__(self) -> int:
        return len(self.segments)

    def inverse(self, graph: Graph) -> "PLPath":
        segs = tuple((-e, 1 - b, 1 - a) for e, a, b in reversed(self.segments))
        return PLPath(self.end(graph), segs)

    def key(self):
        return (self.start.sort_key(), tuple((e, a, b) for e, a, b in self.segments))


def edge_path_pl(graph: Graph, path: Sequence[int], start: int | None = None) -> PLPath:
    if not path:
        if start is None:
            raise GraphMapError("empty path needs a start vertex")
        return PLPath(GraphPoint.at_vertex(start), ())
    one, zero = Fraction(1), Fraction(0)
    return PLPath(GraphPoint.at_vertex(graph.origin(path[0])), tuple((e, zero, one) for e in path))


def _push(stack: list[Segment], seg: Segment) -> None:
    e, a, b = seg
    while stack:
        e0, a0, b0 = stack[-1]
        if e == e0 and a == b0 and b0 < 1:
            stack[-1] = (e0, a0, b)
            return
        if e == -e0 and 1 - a == b0:
            back_to = 1 - b
            if back_to > a0:
                stack[-1] = (e0, a0, back_to)
                return
            stack.pop()
            if back_to == a0:
                return
            e, a, b = e, 1 - a0, b
            continue
        break
    stack.append((e, a, b))


def tighten_segments(segments: Iterable[Segment]) -> tuple[Segment, ...]:
    stack: list[Segment] = []
    for seg in segments:
        _push(stack, seg)
    return tuple(stack)


def pl_concat(graph: Graph, *paths: PLPath) -> PLPath:
    segs: list[Segment] = []
    for p in paths:
        segs.extend(p.segments)
    return PLPath(paths[0].start, tighten_segments(segs))


# ---------------------------------------------------------------------------
# graph maps


@dataclass(frozen=True)
class GraphMap:
    graph: Graph
    vertex_map: Mapping[int, int]
    edge_map: Mapping[int, Word]
    marking: Marking
    standard: bool = True
    log: tuple[str, ...] = field(default=(), compare=False)
    parents: Mapping[int, Segment] | None = field(default=None, compare=False)

    def __post_init__(self):
        g = self.graph
        for e, img in self.edge_map.items():
            if not img:
                if self.vertex_map[g.origin(e)] != self.vertex_map[g.terminus(e)]:
                    raise GraphMapError(f"edge {g.edge_name(e)} collapses between distinct image vertices")
                continue
            if g.origin(img[0]) != self.vertex_map[g.origin(e)] or g.terminus(img[-1]) != self.vertex_map[g.terminus(e)]:
                raise GraphMapError(f"image of {g.edge_name(e)} has inconsistent endpoints")
            if not g.is_edge_path(img):
                raise GraphMapError(f"image of {g.edge_name(e)} is not an edge path")

    # -- basic queries -------------------------------------------------
    def image(self, e: int) -> Word:
        return self.edge_map[e] if e > 0 else inverse(self.edge_map[-e])

    def path_image(self, path: Sequence[int]) -> Word:
        return multiply(*(self.image(e) for e in path))

    def edges(self) -> list[int]:
        return sorted(self.graph.edges)

    @property
    def rank(self) -> int:
        return self.marking.rank

    def norm(self) -> int:
        return max(len(img) for img in self.edge_map.values())

    @cached_property
    def reader(self) -> MarkedReader:
        return MarkedReader(self.graph, self.marking)

    def induced_automorphism(self) -> Automorphism:
        """Representative in Aut(F_N) of the outer class of this map."""
        r = self.reader
        imgs = tuple(r.word(self.path_image(loop)) for loop in self.marking.loops)
        return Automorphism(self.rank, imgs, validate=False)

    def abelianized_action(self) -> tuple[tuple[int, ...], ...]:
        return self.induced_automorphism().abelianization()

    def with_log(self, *entries: str) -> "GraphMap":
        return replace(self, log=self.log + tuple(entries))

    # -- PL action -----------------------------------------------------
    def point_image(self, p: GraphPoint) -> GraphPoint:
        if p.is_vertex:
            return GraphPoint.at_vertex(self.vertex_map[p.vertex])
        img = self.edge_map[p.edge]
        n = len(img)
        u = n * p.coord
        k = floor(u)
        local = u - k
        if not img:
            return GraphPoint.at_vertex(self.vertex_map[self.graph.origin(p.edge)])
        if local == 0:
            return GraphPoint.at_vertex(self.graph.origin(img[k]))
        return point_on(self.graph, img[k], local)

    def segment_image(self, seg: Segment) -> list[Segment]:
        e, a, b = seg
        img = self.image(e)
        n = len(img)
        lo, hi = n * a, n * b
        out = []
        for k in range(floor(lo), min(n, floor(hi) + 1)):
            s, t = max(lo, k) - k, min(hi, k + 1) - k
            if s < t:
                out.append((img[k], s, t))
        return out

    def pl_image(self, path: PLPath) -> PLPath:
        """Tightened image of a PL path."""
        segs: list[Segment] = []
        for seg in path.segments:
            segs.extend(self.segment_image(seg))
        return PLPath(self.point_image(path.start), tighten_segments(segs))


def tighten(path: Sequence[int]) -> Word:
    return free_reduce(path)


def cyclic_tighten(path: Sequence[int]) -> Word:
    from .words import cyclic_reduce

    return cyclic_reduce(path)


def map_norm(f: GraphMap) -> int:
    return f.norm()


def rose_representative(phi: Automorphism) -> GraphMap:
    n = phi.rank
    names = {i: LETTERS[i - 1] for i in range(1, n + 1)}
    graph = Graph((0,), {i: (0, 0) for i in range(1, n + 1)}, {0: "v"}, names)
    marking = Marking(0, tuple((i,) for i in range(1, n + 1)), tuple(LETTERS[:n]), ())
    return GraphMap(graph, {0: 0}, {i: phi.images[i - 1] for i in range(1, n + 1)}, marking)


def transition_matrix(f: GraphMap) -> CountMatrix:
    edges = f.edges()
    pos = {e: i for i, e in enumerate(edges)}
    rows = [[0] * len(edges) for _ in edges]
    for j, e in enumerate(edges):
        for x in f.edge_map[e]:
            rows[pos[abs(x)]][j] += 1
    return CountMatrix(tuple(tuple(r) for r in rows))


def derivative_map(f: GraphMap) -> dict[int, int]:
    """Df: each direction to the first edge of its image (0 if the image is trivial)."""
    return {d: (f.image(d)[0] if f.image(d) else 0) for d in f.graph.all_directions()}


def iterate_image(f: GraphMap, path, t: int):
    """f^t of an edge path (or PL path), tightened after every round."""
    if t < 1:
        raise GraphMapError("t must be >= 1")
    if isinstance(path, PLPath):
        for _ in range(t):
            path = f.pl_image(path)
        return path
    p = tighten(path)
    for _ in range(t):
        p = f.path_image(p)
    return p


def power_map(f: GraphMap, n: int) -> GraphMap:
    """The standard map whose edge images are the tightened f^n images."""
    images = {e: iterate_image(f, (e,), n) for e in f.edges()}
    vmap = {}
    for v in f.graph.vertices:
        w = v
        for _ in range(n):
            w = f.vertex_map[w]
        vmap[v] = w
    return GraphMap(f.graph, vmap, images, f.marking, True, f.log + (f"power {n}",))


def image_lengths(f: GraphMap, k: int) -> list[dict[int, int]]:
    """``out[j][e] = |f^j(e)|`` for j <= k, without tightening (train tracks)."""
    out = [{e: 1 for e in f.edges()}]
    for _ in range(k):
        prev = out[-1]
        out.append({e: sum(prev[abs(x)] for x in f.edge_map[e]) for e in f.edges()})
    return out


# ---------------------------------------------------------------------------
# fixed points and subdivision


def fixed_points(f: GraphMap) -> list[GraphPoint]:
    """The exact fixed set of a standard map (finite when no edge is fixed)."""
    if not f.standard:
        raise GraphMapError("fixed points need a standard map")
    pts = [GraphPoint.at_vertex(v) for v in f.graph.vertices if f.vertex_map[v] == v]
    for e in f.edges():
        img = f.edge_map[e]
        n = len(img)
        for i, x in enumerate(img, start=1):
            if x == -e:
                pts.append(GraphPoint.on_edge(e, Fraction(i, n + 1)))
            elif x == e and 1 < i < n:
                pts.append(GraphPoint.on_edge(e, Fraction(i - 1, n - 1)))
            elif x == e and n == 1:
                raise GraphMapError(f"edge {f.graph.edge_name(e)} is fixed pointwise")
    return pts


def subdivide_at(f: GraphMap, points: Sequence[GraphPoint]) -> GraphMap:
    """Promote interior points to vertices; the map must send them to vertices.

    The result records, for each new edge, the parent segment it came from.
    """
    g = f.graph
    cuts: dict[int, list[Fraction]] = {}
    for p in points:
        if p.is_vertex:
            raise GraphMapError(f"point {p} is already a vertex")
        cuts.setdefault(p.edge, []).append(p.coord)
    next_v = max(g.vertices) + 1
    next_e = max(g.edges) + 1
    vertices = list(g.vertices)
    vnames = dict(g.vertex_names)
    enames = dict(g.edge_names)
    new_edges: dict[int, tuple[int, int]] = {}
    pieces: dict[int, list[tuple[int, Fraction, Fraction]]] = {}
    where: dict[GraphPoint, int] = {}
    parents: dict[int, Segment] = {}
    base_parents = f.parents or {}
    for e in sorted(g.edges):
        o, t = g.edges[e]
        cs = sorted(set(cuts.get(e, [])))
        if not cs:
            new_edges[e] = (o, t)
            pieces[e] = [(e, Fraction(0), Fraction(1))]
            parents[e] = base_parents.get(e, (e, Fraction(0), Fraction(1)))
            continue
        stops = [Fraction(0)] + cs + [Fraction(1)]
        vs = [o]
        for c in cs:
            vertices.append(next_v)
            vnames[next_v] = f"{g.vertex_name(o)}.{g.edge_name(e)}@{c}"
            where[GraphPoint.on_edge(e, c)] = next_v
            vs.append(next_v)
            next_v += 1
        vs.append(t)
        pieces[e] = []
        for k in range(len(stops) - 1):
            eid = next_e
            next_e += 1
            new_edges[eid] = (vs[k], vs[k + 1])
            enames[eid] = f"{g.edge_name(e)}.{k + 1}"
            pieces[e].append((eid, stops[k], stops[k + 1]))
            parents[eid] = _compose_parent(base_parents.get(e, (e, Fraction(0), Fraction(1))), stops[k], stops[k + 1])
    newg = Graph(tuple(vertices), new_edges, vnames, enames)

    def spell(seg: Segment) -> Word:
        e, a, b = seg
        if e > 0:
            return tuple(pid for pid, s, t in pieces[e] if a <= s and t <= b)
        return inverse(spell((-e, 1 - b, 1 - a)))

    def vertex_of(p: GraphPoint) -> int:
        if p.is_vertex:
            return p.vertex
        if p not in where:
            raise GraphMapError(f"image point {p} is not a vertex after subdivision")
        return where[p]

    vmap = {v: f.vertex_map[v] for v in g.vertices}
    for p, v in where.items():
        vmap[v] = vertex_of(f.point_image(p))
    emap = {}
    for e in sorted(g.edges):
        for pid, a, b in pieces[e]:
            segs = f.segment_image((e, a, b))
            word: list[int] = []
            for seg in segs:
                part = spell(seg)
                if not _covers(pieces, seg):
                    raise GraphMapError(f"image of {seg} does not end at subdivision vertices")
                word.extend(part)
            emap[pid] = free_reduce(word)
    loops = tuple(free_reduce(x for d in loop for x in spell((d, Fraction(0), Fraction(1)))) for loop in f.marking.loops)
    marking = Marking(f.marking.base, loops, f.marking.names, ())
    return GraphMap(newg, vmap, emap, marking, False, f.log + (f"subdivide {len(where)} points",), parents)


def _covers(pieces, seg: Segment) -> bool:
    e, a, b = seg
    if e < 0:
        e, a, b = -e, 1 - b, 1 - a
    stops = {s for _, s, _ in pieces[e]} | {Fraction(1)}
    return a in stops and b in stops


def _compose_parent(parent: Segment, s: Fraction, t: Fraction) -> Segment:
    e, a, b = parent
    return (e, a + (b - a) * s, a + (b - a) * t)


def gamma_prime(f: GraphMap) -> GraphMap:
    """Subdivide at every interior fixed point of f."""
    return subdivide_at(f, [p for p in fixed_points(f) if not p.is_vertex])


# ---------------------------------------------------------------------------
# serialization


def to_json_obj(f: GraphMap) -> dict:
    g = f.graph
    vn, en = g.vertex_name, g.edge_name
    tree = list(f.marking.tree) or sorted(MarkedReader(g, f.marking).tree)
    return {
        "graph": {
            "vertices": [vn(v) for v in g.vertices],
            "edges": [{"id": en(e), "from": vn(o), "to": vn(t)} for e, (o, t) in g.edges.items()],
        },
        "map": {
            "vertices": {vn(v): vn(f.vertex_map[v]) for v in g.vertices},
            "edges": {en(e): [en(x) for x in f.edge_map[e]] for e in g.edges},
        },
        "marking": {
            "tree": [en(e) for e in tree],
            "generators": {name: [en(x) for x in loop] for name, loop in zip(f.marking.names, f.marking.loops)},
        },
    }


def to_json(f: GraphMap, extra: dict | None = None) -> str:
    obj = to_json_obj(f)
    if extra:
        obj.update(extra)
    return json.dumps(obj, indent=2) + "\n"


def from_json_obj(obj: dict) -> GraphMap:
    gobj = obj["graph"]
    vids = {}
    for i, name in enumerate(gobj["vertices"]):
        vids[str(name)] = i
    eids = {}
    edges = {}
    for i, rec in enumerate(gobj["edges"], start=1):
        name = str(rec["id"])
        if name.startswith("-"):
            raise GraphMapError(f"edge id {name!r} may not start with '-'")
        eids[name] = i
        edges[i] = (vids[str(rec["from"])], vids[str(rec["to"])])

    def signed(s) -> int:
        s = str(s)
        return -eids[s[1:]] if s.startswith("-") else eids[s]

    graph = Graph(tuple(vids.values()), edges, {i: n for n, i in vids.items()}, {i: n for n, i in eids.items()})
    mobj = obj["map"]
    vmap = {vids[str(k)]: vids[str(v)] for k, v in mobj["vertices"].items()}
    emap = {eids[str(k)]: tuple(signed(x) for x in v) for k, v in mobj["edges"].items()}
    mk = obj["marking"]
    loops = tuple(tuple(signed(x) for x in loop) for loop in mk["generators"].values())
    names = tuple(mk["generators"].keys())
    base = graph.origin(loops[0][0]) if loops and loops[0] else 0
    marking = Marking(base, loops, names, tuple(eids[str(x)] for x in mk.get("tree", [])))
    return GraphMap(graph, vmap, emap, marking)


def from_json(text: str) -> GraphMap:
    return from_json_obj(json.loads(text))
