"""Acceptance criteria; each test prints one PASS/FAIL line."""

import json
import os
import random
import time
from pathlib import Path

import pytest

from iwip.bench import BenchConfig, bench_run, load_generators, random_walk
from iwip.decide import FULLY_IRREDUCIBLE, NOT_FULLY_IRREDUCIBLE, compose_word, decide_automorphism
from iwip.graphmap import from_json_obj
from iwip.nielsen import component_subgroups, find_inps, find_pinps, is_atoroidal, is_primitively_atoroidal, nielsen_graph
from iwip.oracle import brute_inps, inp_signature
from iwip.words import Automorphism, are_conjugate, inner_automorphism, inverse, parse_word

from conftest import FIBONACCI, TRIBONACCI_LIKE, TWISTED_FIBONACCI, aut

CORPUS = json.loads((Path(__file__).parent / "data" / "inp_corpus.json").read_text())
JOBS = max(1, min(4, os.cpu_count() or 1))


@pytest.fixture
def report(capsys):
    def emit(name: str, ok: bool, detail: str = "") -> None:
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else ""))
    return emit


def timed_decide(text):
    t0 = time.perf_counter()
    v = decide_automorphism(aut(text))
    return v, time.perf_counter() - t0


def test_c1_goldens(report):
    problems = []
    times = {}
    for text, outcome, kind in [
        (FIBONACCI, FULLY_IRREDUCIBLE, None),
        (TWISTED_FIBONACCI, FULLY_IRREDUCIBLE, None),
        (TRIBONACCI_LIKE, FULLY_IRREDUCIBLE, None),
        ("a->ab; b->b", NOT_FULLY_IRREDUCIBLE, "Reduction"),
        ("a->b; b->a", NOT_FULLY_IRREDUCIBLE, "FiniteOrder"),
    ]:
        v, dt = timed_decide(text)
        times[text] = round(dt, 3)
        if v.outcome != outcome or (kind and v.certificate.kind != kind):
            problems.append(f"{text}: {v.outcome}/{v.certificate.kind}")
        if dt >= 1.0:
            problems.append(f"{text}: {dt:.2f}s")
        if text == TWISTED_FIBONACCI:
            if v.stats["bh_folds"] < 1 or abs(v.stats["lambda"] - 1.6180339887) > 1e-6:
                problems.append(f"twisted: folds {v.stats['bh_folds']} lambda {v.stats['lambda']}")
        if text == TRIBONACCI_LIKE:
            if abs(v.stats["lambda"] - 1.3247179572) > 1e-6 or v.stats["pinps"] != 0:
                problems.append(f"tribonacci-like: lambda {v.stats['lambda']} pinps {v.stats['pinps']}")
    report("C1 goldens", not problems, "; ".join(problems) or f"max {max(times.values()):.3f}s")
    assert not problems


def test_c2_fibonacci(report):
    v = decide_automorphism(aut(FIBONACCI))
    f = v.map
    search = find_pinps(f)
    periods = [p.period for p in search.pinps]
    subs = component_subgroups(nielsen_graph(search.pinps, f.graph), f)
    commutator = parse_word("abAB")

    def generates(w):
        return are_conjugate(w, commutator) or are_conjugate(inverse(w), commutator)

    a = is_atoroidal(f, search=search)
    p = is_primitively_atoroidal(f, search=search)
    checks = {
        "pINP of period 2": 2 in periods,
        "one component, cyclic <abAB>": len(subs) == 1 and len(subs[0]) == 1 and generates(subs[0][0]),
        "not atoroidal, witness abAB": (not a.value) and a.witness is not None and generates(a.witness),
        "primitively atoroidal": p.value,
    }
    bad = [k for k, ok in checks.items() if not ok]
    report("C2 Fibonacci Nielsen data", not bad, ", ".join(bad) or f"periods {periods}")
    assert not bad


def test_c3a_find_inps_matches_brute_force(report):
    t0 = time.perf_counter()
    mismatches = []
    nonempty = 0
    for entry in CORPUS:
        f = from_json_obj(entry["map"])
        fast = inp_signature(f, find_inps(f))
        slow = inp_signature(f, brute_inps(f, entry["leg_bound"]))
        nonempty += bool(slow)
        if fast != slow:
            mismatches.append(entry["aut"])
    dt = time.perf_counter() - t0
    ok = not mismatches and len(CORPUS) >= 25 and dt < 300
    ranks = sorted({from_json_obj(e["map"]).rank for e in CORPUS})
    report("C3 find_inps == brute_inps", ok,
           f"{len(CORPUS)} maps (ranks {ranks}, {nonempty} with INPs), {len(mismatches)} mismatches, {dt:.1f}s")
    assert ok


@pytest.mark.xfail(strict=True, reason="only 16 expanding train track maps satisfy the literal size bound 20")
def test_c3b_literal_corpus_size(report):
    literal = [e for e in CORPUS if e["source"] == "literal"]
    ok = len(literal) >= 25 and all(e["leg_bound"] <= 20 for e in literal)
    report("C3 literal corpus of >= 25 maps with m*|f|^m+4 <= 20", ok,
           f"{len(literal)} exist; the brute-force comparison uses {len(CORPUS)} maps (see C3 above)")
    assert ok


def test_c4_inequalities(report):
    cfg = BenchConfig(ranks=(2, 3), walk_lengths=tuple(range(1, 13)), samples=204, seed=2024)
    r = bench_run(cfg, jobs=JOBS)
    s = r["summary"]
    bad = [(row["aut"], row["violations"]) for row in r["samples"] if row.get("violations")]
    ok = s["samples"] >= 200 and s["errors"] == 0 and s["violations"] == 0
    report("C4 inequality suite", ok,
           f"{s['samples']} samples, {s['errors']} errors, {s['violations']} violations {bad[:3] if bad else ''}".strip())
    assert ok


def _permutation(rank: int, rng: random.Random) -> Automorphism:
    perm = list(range(1, rank + 1))
    rng.shuffle(perm)
    return Automorphism(rank, tuple((p,) for p in perm))


def test_c5_equivariance(report):
    rng = random.Random(5)
    gens = {N: load_generators(None, N) for N in (2, 3)}
    bad = []
    n = 0
    for _ in range(50):
        N = rng.choice((2, 3))
        phi = compose_word(random_walk(gens[N], rng.randint(2, 7), rng), gens[N], N)
        base = decide_automorphism(phi).outcome
        g = tuple(rng.choice([1, -1]) * rng.randint(1, N) for _ in range(rng.randint(1, 3)))
        sigma = _permutation(N, rng)
        variants = {
            "inner": inner_automorphism(g, N).compose(phi),
            "permutation": sigma.compose(phi).compose(sigma.inverse()),
            "square": phi.compose(phi),
        }
        for name, psi in variants.items():
            if decide_automorphism(psi).outcome != base:
                bad.append(f"{name}: {phi.format()}")
        n += 1
    report("C5 equivariance", not bad, f"{n} samples x 3 twists" + (f"; {bad[:3]}" if bad else ""))
    assert not bad


def test_c6_complexity_report(report, tmp_path):
    from iwip.bench import render_figure

    r = bench_run(BenchConfig(ranks=(3,), walk_lengths=tuple(range(2, 13)), samples=44, seed=6), jobs=JOBS)
    fit = r["timing"]["fit"]
    render_figure(r, tmp_path / "bench.png")
    slope = "n/a" if fit["slope"] is None else f"{fit['slope']:.2f}"
    r2 = "n/a" if fit["r2"] is None else f"{fit['r2']:.2f}"
    report("C6 complexity report (non-gating)", True, f"log-log slope {slope}, R^2 {r2}; {fit['note']}")
    assert "not a proof" in fit["note"]
