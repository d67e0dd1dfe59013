"""Certified decision of full irreducibility."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .graphmap import GraphMap, gamma_prime, fixed_points, rose_representative, transition_matrix
from .nielsen import (
    Atoroidality, FeighnHandel, LcmHeuristic, PeriodPolicy, PeriodPolicyRefused, find_pinps,
    is_primitively_atoroidal, paper_leg_bound,
)
from .pfmatrix import CountMatrix, bh_entry_bound, is_irreducible, is_permutation, pf_eigenvalue
from .traintrack import MAX_STEPS, TrainTrackOutcome, bestvina_handel, is_train_track
from .whitehead import taken_turns, whitehead_graph
from .words import Automorphism, Word, are_conjugate, format_word, mod2_class

FULLY_IRREDUCIBLE = "FullyIrreducible"
NOT_FULLY_IRREDUCIBLE = "NotFullyIrreducible"


@dataclass(frozen=True)
class Reduction:
    invariant_edges: tuple[int, ...]
    free_factors: tuple[tuple[Word, ...], ...]
    kind: str = "Reduction"

    def to_json(self, f: GraphMap) -> dict:
        return {
            "kind": self.kind,
            "invariant_subgraph": [f.graph.edge_name(e) for e in self.invariant_edges],
            "free_factors": [[format_word(w) for w in ff] for ff in self.free_factors],
        }


@dataclass(frozen=True)
class FiniteOrder:
    matrix: CountMatrix
    kind: str = "FiniteOrder"

    def to_json(self, f: GraphMap) -> dict:
        return {"kind": self.kind, "matrix": self.matrix.to_list()}


@dataclass(frozen=True)
class NotPrimitivelyAtoroidal:
    witness: Word
    period: int
    kind: str = "NotPrimitivelyAtoroidal"

    def to_json(self, f: GraphMap) -> dict:
        return {"kind": self.kind, "witness": format_word(self.witness), "period": self.period,
                "mod2": list(mod2_class(self.witness, f.rank))}


@dataclass(frozen=True)
class DisconnectedWhitehead:
    vertex: int
    components: tuple[tuple[int, ...], ...]
    kind: str = "DisconnectedWhitehead"

    def to_json(self, f: GraphMap) -> dict:
        g = f.graph
        return {"kind": self.kind, "vertex": g.vertex_name(self.vertex),
                "components": [[g.edge_name(d) for d in c] for c in self.components]}


@dataclass(frozen=True)
class WeaklyCleanAndPrimitivelyAtoroidal:
    lam: float
    pinps: int
    periods: tuple[int, ...]
    subgroups: tuple[tuple[Word, ...], ...]
    kind: str = "WeaklyCleanAndPrimitivelyAtoroidal"

    def to_json(self, f: GraphMap) -> dict:
        return {"kind": self.kind, "lambda": self.lam, "pinps": self.pinps, "periods": list(self.periods),
                "subgroups": [[format_word(w) for w in s] for s in self.subgroups]}


Certificate = Reduction | FiniteOrder | NotPrimitivelyAtoroidal | DisconnectedWhitehead | WeaklyCleanAndPrimitivelyAtoroidal


@dataclass(frozen=True)
class Verdict:
    outcome: str
    certificate: Certificate
    map: GraphMap
    policy_relative: bool = False
    stats: Mapping = field(default_factory=dict, compare=False)
    train_track: TrainTrackOutcome | None = field(default=None, compare=False, repr=False)
    atoroidality: Atoroidality | None = field(default=None, compare=False, repr=False)

    @property
    def fully_irreducible(self) -> bool:
        return self.outcome == FULLY_IRREDUCIBLE

    def to_json(self) -> dict:
        return {
            "verdict": self.outcome,
            "policy_relative": self.policy_relative,
            "certificate": self.certificate.to_json(self.map),
            "stats": dict(self.stats),
        }


def _whitehead_components(f: GraphMap, v: int, turns) -> tuple[tuple[int, ...], ...]:
    G = whitehead_graph(f, v, turns)
    adj = {d: set() for d in G.vertices}
    for a, b in G.edges:
        adj[a].add(b)
        adj[b].add(a)
    seen, comps = set(), []
    for d in G.vertices:
        if d in seen:
            continue
        comp, stack = [], [d]
        seen.add(d)
        while stack:
            x = stack.pop()
            comp.append(x)
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        comps.append(tuple(sorted(comp, key=lambda x: (abs(x), x < 0))))
    return tuple(comps)


class StrictRefusal(RuntimeError):
    """Strict mode will not call a map fully irreducible on a heuristic period search."""

    def __init__(self, verdict: "Verdict"):
        super().__init__("fully irreducible only relative to the period policy "
                         f"(powers searched: {list(verdict.stats.get('powers_searched', []))})")
        self.verdict = verdict


def decide(f0: GraphMap, policy: PeriodPolicy | None = None, max_period: int | None = None,
           tol: float = 1e-9, strict: bool = False, fast: bool = False, max_steps: int = MAX_STEPS) -> Verdict:
    """Bestvina-Handel, finite order, primitive atoroidality, then Whitehead graphs.

    ``fast`` checks the Whitehead graphs before the Nielsen path search.
    ``strict`` raises StrictRefusal instead of answering FullyIrreducible unless the
    period policy provably covers every period.
    """
    t0 = time.perf_counter()
    stats: dict = {"input_norm": f0.norm(), "rank": f0.rank}
    tt = bestvina_handel(f0, tol=tol, max_steps=max_steps)
    t1 = time.perf_counter()
    stats.update(bh_steps=tt.steps, bh_folds=tt.folds, lambdas=list(tt.lambdas), entry_norms=list(tt.entry_norms),
                 bh_violations=list(tt.violations), bh_seconds=t1 - t0)
    f = tt.map
    stats["train_track_norm"] = f.norm()

    def done(outcome, cert, relative=False, ator=None):
        stats["seconds"] = time.perf_counter() - t0
        return Verdict(outcome, cert, f, relative, stats, tt, ator)

    if tt.kind == "Reduction":
        return done(NOT_FULLY_IRREDUCIBLE, Reduction(tt.invariant_edges, tt.free_factors))
    M = transition_matrix(f)
    if is_permutation(M):
        return done(NOT_FULLY_IRREDUCIBLE, FiniteOrder(M))
    stats["lambda"] = tt.lam

    turns = taken_turns(f)
    stats["turn_rounds"] = turns.rounds

    def whitehead_cut():
        for v in f.graph.vertices:
            comps = _whitehead_components(f, v, turns)
            if len(comps) > 1:
                return DisconnectedWhitehead(v, comps)
        return None

    if fast:
        cut = whitehead_cut()
        if cut is not None:
            return done(NOT_FULLY_IRREDUCIBLE, cut)

    policy = policy if policy is not None else LcmHeuristic()
    relative = False
    try:
        search = find_pinps(f, policy, max_period)
    except PeriodPolicyRefused as exc:
        stats["policy_refused"] = str(exc)
        relative = True
        search = find_pinps(f, LcmHeuristic(), max_period)
    stats.update(powers_searched=list(search.powers), powers_skipped=list(search.skipped),
                 leg_bound=search.leg_bound, pinps=len(search.pinps),
                 pinp_periods=sorted({p.period for p in search.pinps}))
    if search.skipped:
        relative = True
    ator = is_primitively_atoroidal(f, search=search)
    stats["nielsen_seconds"] = time.perf_counter() - t1
    if not ator.value:
        return done(NOT_FULLY_IRREDUCIBLE, NotPrimitivelyAtoroidal(ator.witness, _class_period(f, ator.witness, search)), False, ator)

    cut = None if fast else whitehead_cut()
    if cut is not None:
        return done(NOT_FULLY_IRREDUCIBLE, cut, False, ator)
    cert = WeaklyCleanAndPrimitivelyAtoroidal(tt.lam, len(search.pinps), tuple(sorted({p.period for p in search.pinps})),
                                              ator.subgroups)
    verdict = done(FULLY_IRREDUCIBLE, cert, relative, ator)
    if strict and (relative or not isinstance(policy, FeighnHandel)):
        raise StrictRefusal(verdict)
    return verdict


def _class_period(f: GraphMap, w: Word, search) -> int:
    phi = f.induced_automorphism()
    limit = max([p.period for p in search.pinps] + list(search.powers) + [1])
    psi = phi
    for k in range(1, limit + 1):
        if are_conjugate(psi(w), w):
            return k
        psi = phi.compose(psi)
    return limit


def decide_automorphism(phi: Automorphism, **kw) -> Verdict:
    return decide(rose_representative(phi), **kw)


def parse_generator_word(text: str) -> list[tuple[str, int]]:
    """``"s1 s2^-1 s3^2"`` into (symbol, exponent) pairs."""
    out = []
    for tok in text.split():
        name, _, exp = tok.partition("^")
        out.append((name, int(exp) if exp else 1))
    return out


def compose_word(word: str | Sequence[tuple[str, int]], gens: Mapping[str, Automorphism], rank: int | None = None) -> Automorphism:
    """Product s1 s2 ... sk, read as the composite s1 o s2 o ... o sk."""
    items = parse_generator_word(word) if isinstance(word, str) else list(word)
    if rank is None:
        ranks = {g.rank for g in gens.values()}
        if len(ranks) != 1:
            raise ValueError("cannot infer the rank from the generator set")
        rank = ranks.pop()
    phi = Automorphism.identity(rank)
    for name, exp in items:
        if name not in gens:
            raise KeyError(f"unknown generator {name!r}")
        g = gens[name].power(exp)
        phi = phi.compose(g)
    return phi


def decide_word(word, gens: Mapping[str, Automorphism], rank: int | None = None, **kw) -> Verdict:
    return decide_automorphism(compose_word(word, gens, rank), **kw)


# ---------------------------------------------------------------------------
# replaying certificates and the quantitative bounds


def replay(verdict: Verdict, phi: Automorphism | None = None) -> bool:
    """Re-check the certificate against the operations it refers to."""
    f = verdict.map
    if phi is not None and (phi.rank != f.rank or not f.induced_automorphism().outer_equal(phi)):
        return False
    cert = verdict.certificate
    M = transition_matrix(f)
    if isinstance(cert, Reduction):
        S = set(cert.invariant_edges)
        closed = all(abs(x) in S for e in S for x in f.edge_map[e])
        return bool(S) and S != set(f.edges()) and closed and not verdict.fully_irreducible
    if isinstance(cert, FiniteOrder):
        return is_permutation(M) and cert.matrix == M
    if isinstance(cert, NotPrimitivelyAtoroidal):
        psi = f.induced_automorphism().power(cert.period)
        return any(mod2_class(cert.witness, f.rank)) and are_conjugate(psi(cert.witness), cert.witness)
    if isinstance(cert, DisconnectedWhitehead):
        return len(_whitehead_components(f, cert.vertex, taken_turns(f))) > 1
    if isinstance(cert, WeaklyCleanAndPrimitivelyAtoroidal):
        ok, _ = is_train_track(f)
        turns = taken_turns(f)
        return (ok and is_irreducible(M)[0] and not is_permutation(M)
                and all(len(_whitehead_components(f, v, turns)) == 1 for v in f.graph.vertices)
                and all(not any(mod2_class(w, f.rank)) for s in cert.subgroups for w in s))
    return False


def bound_violations(verdict: Verdict, f0: GraphMap | None = None, tol: float = 1e-9) -> list[str]:
    """Quantitative inequalities that every run must satisfy; returns the broken ones."""
    out = list(verdict.stats.get("bh_violations", []))
    f = verdict.map
    N = f.rank
    m = len(f.graph.edges)
    lams = verdict.stats.get("lambdas", [])
    for a, b in zip(lams, lams[1:]):
        if b > a + 2 * tol:
            out.append(f"lambda rose {a} -> {b}")
    if f0 is not None:
        bound = bh_entry_bound(N, f0.norm())
        for x in verdict.stats.get("entry_norms", []):
            if x > bound:
                out.append(f"entry norm {x} > {bound}")
    M = transition_matrix(f)
    n = M.n
    if is_irreducible(M)[0]:
        lam = pf_eigenvalue(M)
        if lam > n * M.norm() + 1e-9:
            out.append(f"lambda {lam} > n||M|| = {n * M.norm()}")
        if M.total() > n * lam ** (n + 1) * (1 + 1e-6):
            out.append(f"sum of entries {M.total()} > n lambda^(n+1)")
    if verdict.certificate.kind in ("Reduction",):
        return out
    turns = taken_turns(f)
    if turns.rounds > 36 * N * N:
        out.append(f"taken turns needed {turns.rounds} rounds")
    if is_permutation(M):
        return out
    pts = fixed_points(f)
    if len(pts) > 2 * m * f.norm():
        out.append(f"{len(pts)} fixed points > 2m||f||")
    fp = gamma_prime(f)
    if fp.norm() > f.norm() ** 2:
        out.append(f"||f'|| = {fp.norm()} > ||f||^2")
    ator = verdict.atoroidality
    if ator is not None:
        if len(ator.search.pinps) > 36 * N * N:
            out.append(f"{len(ator.search.pinps)} pINPs > 36N^2")
        legb = paper_leg_bound(f)
        for p in ator.search.pinps:
            if p.period == 1 and (len(p.alpha) > legb or len(p.beta) > legb):
                out.append(f"INP leg longer than {legb}")
    return out
