"""Stallings folding of finitely generated subgroups of F_N.

Edges may carry a second label, an element of the free group on the
generating words themselves.  Folding then tracks how each loop of the
folded graph is spelled in the generators, which is how bases are
inverted.
"""

from __future__ import annotations

from collections import deque
from typing import Sequence

from .words import NotAnAutomorphism, Word, inverse, multiply


class NotInjective(ValueError):
    """Folding identified two parallel edges whose transversal labels differ."""


class FoldedGraph:
    """Labelled graph, folded to an immersion at construction time.

    ``edges[eid] = [u, x, v, s]`` is an edge from ``u`` to ``v`` reading the
    letter ``x`` and carrying transversal label ``s``.
    """

    def __init__(self, gens: Sequence[Sequence[int]], track: bool = False):
        self.track = track
        self.base = 0
        self._parent: dict[int, int] = {0: 0}
        self._next_vertex = 1
        self.edges: dict[int, list] = {}
        self._next_edge = 0
        self._incident: dict[int, set[int]] = {0: set()}
        self._index: dict[tuple[int, int], int] = {}
        self._conflicts: deque = deque()
        self.gens = [tuple(g) for g in gens]
        for i, g in enumerate(self.gens):
            self._add_petal(g, i + 1)
        self._fold()

    # -- union-find ----------------------------------------------------
    def find(self, v: int) -> int:
        root = v
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[v] != root:
            self._parent[v], v = root, self._parent[v]
        return root

    def _new_vertex(self) -> int:
        v = self._next_vertex
        self._next_vertex += 1
        self._parent[v] = v
        self._incident[v] = set()
        return v

    # -- construction --------------------------------------------------
    def _add_petal(self, word: Word, gen_index: int) -> None:
        if not word:
            return
        prev = self.base
        for k, x in enumerate(word):
            nxt = self.base if k == len(word) - 1 else self._new_vertex()
            label = (gen_index,) if (self.track and k == 0) else ()
            self._add_edge(prev, x, nxt, label)
            prev = nxt

    def _add_edge(self, u: int, x: int, v: int, s: Word) -> None:
        eid = self._next_edge
        self._next_edge += 1
        self.edges[eid] = [u, x, v, s]
        self._incident[u].add(eid)
        self._incident[v].add(eid)
        self._register(eid)

    def _register(self, eid: int) -> None:
        u, x, v, _ = self.edges[eid]
        for key in ((self.find(u), x), (self.find(v), -x)):
            other = self._index.get(key)
            if other is None or other not in self.edges:
                self._index[key] = eid
            elif other != eid:
                self._conflicts.append((key, other, eid))

    def _starts(self, eid: int) -> set[tuple[int, int]]:
        u, x, v, _ = self.edges[eid]
        return {(self.find(u), x), (self.find(v), -x)}

    def _oriented(self, eid: int, start: int, letter: int) -> tuple[int, Word]:
        u, x, v, s = self.edges[eid]
        if self.find(u) == start and x == letter:
            return self.find(v), s
        return self.find(u), inverse(s)

    def _gauge(self, q: int, g: Word) -> None:
        for eid in self._incident[q]:
            e = self.edges[eid]
            if self.find(e[0]) == q:
                e[3] = multiply(g, e[3])
            if self.find(e[2]) == q:
                e[3] = multiply(e[3], inverse(g))

    def _fold(self) -> None:
        while self._conflicts:
            _, e1, e2 = self._conflicts.popleft()
            if e1 not in self.edges or e2 not in self.edges:
                continue
            shared = self._starts(e1) & self._starts(e2)
            if not shared:
                continue
            z, y = min(shared)
            t1, s1 = self._oriented(e1, z, y)
            t2, s2 = self._oriented(e2, z, y)
            if self.track and s1 != s2:
                if t1 == t2:
                    raise NotInjective("parallel edges with different transversal labels")
                self._equalize(z, t1, s1, t2, s2)
                t1, s1 = self._oriented(e1, z, y)
                t2, s2 = self._oriented(e2, z, y)
                assert s1 == s2
            self._remove_edge(e2)
            self._index[(z, y)] = e1
            if t1 != t2:
                self._merge(t1, t2)
            self._register(e1)

    def _equalize(self, z: int, t1: int, s1: Word, t2: int, s2: Word) -> None:
        if t2 not in (z, self.base):
            self._gauge(t2, multiply(inverse(s1), s2))
        elif t1 not in (z, self.base):
            self._gauge(t1, multiply(inverse(s2), s1))
        elif t1 == z:
            self._gauge(z, multiply(inverse(s2), s1))
        else:
            self._gauge(z, multiply(inverse(s1), s2))

    def _remove_edge(self, eid: int) -> None:
        u, x, v, _ = self.edges.pop(eid)
        for w in (u, v):
            self._incident[self.find(w)].discard(eid)

    def _merge(self, keep: int, gone: int) -> None:
        if gone == self.base:
            keep, gone = gone, keep
        self._parent[gone] = keep
        moved = self._incident.pop(gone)
        self._incident[keep] |= moved
        for eid in list(self._incident[keep]):
            if eid in self.edges:
                self._register(eid)

    # -- queries -------------------------------------------------------
    def vertices(self) -> set[int]:
        vs = {self.find(self.base)}
        for u, _, v, _ in self.edges.values():
            vs.add(self.find(u))
            vs.add(self.find(v))
        return vs

    def out_edges(self) -> dict[int, dict[int, tuple[int, Word]]]:
        adj: dict[int, dict[int, tuple[int, Word]]] = {v: {} for v in self.vertices()}
        for u, x, v, s in self.edges.values():
            u, v = self.find(u), self.find(v)
            adj[u][x] = (v, s)
            adj[v][-x] = (u, inverse(s))
        return adj

    def core(self) -> "FoldedGraph":
        """Prune valence-one vertices other than the base, in place."""
        while True:
            deg: dict[int, int] = {}
            for u, _, v, _ in self.edges.values():
                deg[self.find(u)] = deg.get(self.find(u), 0) + 1
                deg[self.find(v)] = deg.get(self.find(v), 0) + 1
            leaves = [e for e, (u, _, v, _) in self.edges.items()
                      if (deg[self.find(u)] == 1 and self.find(u) != self.base)
                      or (deg[self.find(v)] == 1 and self.find(v) != self.base)]
            if not leaves:
                return self
            for e in leaves:
                if e in self.edges:
                    self._remove_edge(e)

    def rank(self) -> int:
        return len(self.edges) - len(self.vertices()) + 1

    def contains(self, w: Sequence[int]) -> bool:
        adj = self.out_edges()
        v = self.find(self.base)
        for x in w:
            if x not in adj.get(v, {}):
                return False
            v = adj[v][x][0]
        return v == self.find(self.base)

    def free_basis(self) -> list[Word]:
        """A free basis of the subgroup read off a spanning tree."""
        adj = self.out_edges()
        base = self.find(self.base)
        path_to: dict[int, Word] = {base: ()}
        tree: set[tuple[int, int]] = set()
        queue = deque([base])
        while queue:
            u = queue.popleft()
            for x in sorted(adj[u], key=lambda t: (abs(t), -t)):
                v = adj[u][x][0]
                if v not in path_to:
                    path_to[v] = path_to[u] + (x,)
                    tree.add((u, x))
                    tree.add((v, -x))
                    queue.append(v)
        basis = []
        for u, x, v, _ in sorted(self.edges.values(), key=lambda e: (abs(e[1]), e[1], e[0])):
            u, v = self.find(u), self.find(v)
            if (u, x) in tree:
                continue
            basis.append(multiply(path_to[u], (x,), inverse(path_to[v])))
        return basis

    def is_full_rose(self, rank: int) -> bool:
        adj = self.out_edges()
        return len(adj) == 1 and set(adj[self.find(self.base)]) == {
            s * i for i in range(1, rank + 1) for s in (1, -1)
        }


def stallings_fold(gens: Sequence[Sequence[int]]) -> FoldedGraph:
    """Fold the wedge of loops spelled by ``gens`` to its immersed core."""
    return FoldedGraph(gens).core()


def generates_free_group(gens: Sequence[Sequence[int]], rank: int) -> bool:
    return len(gens) == rank and FoldedGraph(gens).core().is_full_rose(rank)


def basis_inverse(images: Sequence[Word], rank: int) -> tuple[Word, ...]:
    """Images of the inverse automorphism of ``a_i -> images[i]``."""
    try:
        g = FoldedGraph(images, track=True).core()
    except NotInjective as exc:
        raise NotAnAutomorphism("images are not a free basis") from exc
    if not g.is_full_rose(rank):
        raise NotAnAutomorphism("images do not generate F_N")
    adj = g.out_edges()[g.find(g.base)]
    return tuple(adj[i][1] for i in range(1, rank + 1))
