"""Taken turns, Whitehead graphs at vertices, and the weakly-clean test."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .graphmap import GraphMap, GraphMapError, derivative_map, transition_matrix
from .pfmatrix import is_irreducible, is_permutation

Turn = tuple[int, int]


def make_turn(d1: int, d2: int) -> Turn:
    return (d1, d2) if d1 <= d2 else (d2, d1)


def image_turns(f: GraphMap) -> set[Turn]:
    """Turns crossed inside some edge image."""
    out = set()
    for img in f.edge_map.values():
        for x, y in zip(img, img[1:]):
            out.add(make_turn(-x, y))
    return out


@dataclass(frozen=True)
class TurnSet:
    turns: frozenset[Turn]
    rounds: int

    def __iter__(self) -> Iterator[Turn]:
        return iter(sorted(self.turns))

    def __contains__(self, t) -> bool:
        return make_turn(*t) in self.turns

    def __len__(self) -> int:
        return len(self.turns)


def taken_turns(f: GraphMap) -> TurnSet:
    """Close the image turns under Df; degenerate images are dropped."""
    df = derivative_map(f)
    taken = image_turns(f)
    frontier = set(taken)
    rounds = 0
    while frontier:
        rounds += 1
        nxt = set()
        for d1, d2 in frontier:
            a, b = df[d1], df[d2]
            if a and b and a != b:
                t = make_turn(a, b)
                if t not in taken:
                    nxt.add(t)
        taken |= nxt
        frontier = nxt
    return TurnSet(frozenset(taken), rounds)


@dataclass(frozen=True)
class SimpleGraph:
    vertices: tuple[int, ...]
    edges: frozenset[Turn]

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        adj = {v: set() for v in self.vertices}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)


def whitehead_graph(f: GraphMap, v: int, turns: TurnSet | None = None) -> SimpleGraph:
    if v not in f.graph.vertices:
        raise GraphMapError(f"{v} is not a vertex")
    turns = turns if turns is not None else taken_turns(f)
    dirs = tuple(f.graph.directions(v))
    here = set(dirs)
    return SimpleGraph(dirs, frozenset(t for t in turns.turns if t[0] in here and t[1] in here))


def is_weakly_clean(f: GraphMap) -> bool:
    from .traintrack import is_train_track

    ok, witness = is_train_track(f)
    if not ok:
        raise GraphMapError(f"not a train track map (illegal taken turn {witness})")
    M = transition_matrix(f)
    if not is_irreducible(M)[0] or is_permutation(M):
        return False
    turns = taken_turns(f)
    return all(whitehead_graph(f, v, turns).is_connected() for v in f.graph.vertices)
