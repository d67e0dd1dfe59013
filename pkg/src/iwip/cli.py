"""Command line interface: ``iwip <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import BenchConfig, bench_run, generator_ranks, deterministic_part, load_generators, render_figure
from .decide import StrictRefusal, Verdict, compose_word, decide, parse_generator_word
from .graphmap import GraphMap, from_json, rose_representative, to_json_obj
from .nielsen import (
    PeriodPolicyRefused, find_inps, find_pinps, is_atoroidal, is_primitively_atoroidal, nielsen_graph,
    paper_leg_bound, parse_policy,
)
from .oracle import brute_inps, short_periodic_classes, whitehead_primitivity
from .traintrack import bestvina_handel
from .whitehead import taken_turns, whitehead_graph
from .words import Automorphism, format_word, parse_automorphism, parse_word

EXIT_DECIDED, EXIT_ERROR, EXIT_RELATIVE = 0, 1, 2


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# input


def _word_automorphism(args) -> Automorphism:
    symbols = {name for name, _ in parse_generator_word(args.word)}
    ranks = [args.rank] if args.rank else generator_ranks(args.gens)
    if not ranks:  # a flat file of generators for one rank
        return compose_word(args.word, load_generators(args.gens))
    for N in ranks:
        gens = load_generators(args.gens, N)
        if symbols <= set(gens):
            return compose_word(args.word, gens, N)
    raise UsageError(f"no rank defines all of {sorted(symbols)}")


def read_input(args) -> tuple[GraphMap, Automorphism | None]:
    given = [x for x in (args.aut, args.map, args.word) if x]
    if len(given) != 1:
        raise UsageError("give exactly one of --aut, --map, --word")
    if args.aut:
        phi = parse_automorphism(args.aut)
        return rose_representative(phi), phi
    if args.word:
        phi = _word_automorphism(args)
        return rose_representative(phi), phi
    text = sys.stdin.read() if args.map == "-" else Path(args.map).read_text()
    return from_json(text), None


def _train_track(args) -> tuple[GraphMap | None, dict]:
    f0, _ = read_input(args)
    tt = bestvina_handel(f0, tol=args.tolerance)
    info = {"kind": tt.kind, "lambda": tt.lam, "steps": tt.steps, "folds": tt.folds}
    if tt.kind == "Reduction":
        g = tt.map.graph
        info["invariant_subgraph"] = [g.edge_name(e) for e in tt.invariant_edges]
        info["free_factors"] = [[format_word(w) for w in ff] for ff in tt.free_factors]
        return None, info
    return tt.map, info


def _policy(args):
    return parse_policy(args.period_policy)


# ---------------------------------------------------------------------------
# subcommands; each returns (payload, exit code)


def cmd_decide(args):
    f0, _ = read_input(args)
    try:
        v: Verdict = decide(f0, _policy(args), args.max_period, tol=args.tolerance,
                            strict=args.strict, fast=args.fast)
    except StrictRefusal as exc:
        out = exc.verdict.to_json()
        out["verdict"] = "Undecided"
        out["policy_relative"] = True
        out["reason"] = str(exc)
        return out, EXIT_RELATIVE
    out = v.to_json()
    out["map"] = to_json_obj(v.map)
    return out, EXIT_RELATIVE if v.policy_relative else EXIT_DECIDED


def cmd_traintrack(args):
    f0, _ = read_input(args)
    tt = bestvina_handel(f0, tol=args.tolerance)
    out = {
        "kind": tt.kind, "lambda": tt.lam, "steps": tt.steps, "folds": tt.folds,
        "lambdas": tt.lambdas, "log": list(tt.log), "violations": tt.violations,
        "map": to_json_obj(tt.map),
    }
    if tt.kind == "Reduction":
        g = tt.map.graph
        out["invariant_subgraph"] = [g.edge_name(e) for e in tt.invariant_edges]
        out["free_factors"] = [[format_word(w) for w in ff] for ff in tt.free_factors]
    return out, EXIT_DECIDED


def _needs_tt(info):
    return {"error": "no train track representative: the automorphism is reducible", "train_track": info}, EXIT_ERROR


def cmd_inps(args):
    f, info = _train_track(args)
    if f is None:
        return _needs_tt(info)
    paths = find_inps(f, args.leg_bound)
    return {"train_track": info, "inps": [p.to_json(f.graph) for p in paths]}, EXIT_DECIDED


def cmd_pinps(args):
    f, info = _train_track(args)
    if f is None:
        return _needs_tt(info)
    search = find_pinps(f, _policy(args), args.max_period, args.leg_bound)
    S = nielsen_graph(search.pinps, f.graph)
    out = {
        "train_track": info,
        "powers_searched": list(search.powers),
        "powers_skipped": list(search.skipped),
        "leg_bound": search.leg_bound,
        "pinps": [p.to_json(f.graph) for p in search.pinps],
        "nielsen_graph": {"vertices": len(S.vertices), "edges": len(S.edges), "components": len(S.components())},
    }
    return out, EXIT_RELATIVE if search.skipped else EXIT_DECIDED


def cmd_atoroidal(args):
    f, info = _train_track(args)
    if f is None:
        return _needs_tt(info)
    a = is_atoroidal(f, _policy(args), max_period=args.max_period)
    p = is_primitively_atoroidal(f, search=a.search)
    out = {
        "train_track": info,
        "atoroidal": a.value,
        "witness": format_word(a.witness) if a.witness is not None else None,
        "primitively_atoroidal": p.value,
        "primitive_witness": format_word(p.witness) if p.witness is not None else None,
        "subgroups": [[format_word(w) for w in s] for s in a.subgroups],
        "powers_searched": list(a.search.powers),
        "powers_skipped": list(a.search.skipped),
    }
    return out, EXIT_RELATIVE if a.search.skipped else EXIT_DECIDED


def cmd_whitehead(args):
    f, info = _train_track(args)
    if f is None:
        return _needs_tt(info)
    g = f.graph
    turns = taken_turns(f)
    graphs = {}
    for v in g.vertices:
        W = whitehead_graph(f, v, turns)
        graphs[g.vertex_name(v)] = {
            "vertices": [g.edge_name(d) for d in W.vertices],
            "edges": [[g.edge_name(a), g.edge_name(b)] for a, b in W.edges],
            "connected": W.is_connected(),
        }
    out = {"train_track": info, "turn_rounds": turns.rounds, "whitehead_graphs": graphs,
           "weakly_clean": all(x["connected"] for x in graphs.values())}
    return out, EXIT_DECIDED


def cmd_oracle(args):
    if args.oracle == "primitive":
        if not args.word:
            raise UsageError("oracle primitive needs --word")
        w = parse_word(args.word)
        return {"word": format_word(w), "primitive": whitehead_primitivity(w, args.rank)}, EXIT_DECIDED
    if args.oracle == "periodic-classes":
        if not args.aut:
            raise UsageError("oracle periodic-classes needs --aut")
        phi = parse_automorphism(args.aut)
        classes = short_periodic_classes(phi, args.max_length, args.max_power)
        return {"classes": [format_word(w) for w in classes]}, EXIT_DECIDED
    f, info = _train_track(args)
    if f is None:
        return _needs_tt(info)
    bound = args.leg_bound if args.leg_bound else paper_leg_bound(f)
    paths = brute_inps(f, bound)
    return {"train_track": info, "leg_bound": bound, "inps": [p.to_json(f.graph) for p in paths]}, EXIT_DECIDED


def cmd_bench(args):
    config = BenchConfig(
        ranks=tuple(args.ranks),
        walk_lengths=tuple(range(args.min_length, args.max_length + 1)),
        samples=args.samples,
        seed=args.seed,
        generators=args.gens,
        policy=args.period_policy,
        max_period=args.max_period,
        tolerance=args.tolerance,
    )
    report = bench_run(config, jobs=args.jobs)
    if args.figure:
        report["figure"] = str(render_figure(report, args.figure))
    if args.deterministic:
        report = deterministic_part(report)
    return report, EXIT_DECIDED


# ---------------------------------------------------------------------------
# output


def _text(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        lines = []
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.append(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {v}")
        return "\n".join(lines)
    if isinstance(obj, list):
        if all(not isinstance(x, (dict, list)) for x in obj):
            return pad + ", ".join(str(x) for x in obj)
        return "\n".join(f"{pad}-\n{_text(x, indent + 1)}" if isinstance(x, dict) else _text(x, indent) for x in obj)
    return f"{pad}{obj}"


def emit(payload: dict, fmt: str) -> None:
    if fmt == "text":
        print(_text(payload))
    else:
        print(json.dumps(payload, indent=2, default=str))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_argument_group("input")
    src.add_argument("--aut", help='automorphism, e.g. "a->ab; b->a"')
    src.add_argument("--map", help="graph map JSON file ('-' for stdin)")
    src.add_argument("--word", help='word in generators, e.g. "r12 i2 p12^-1"')
    src.add_argument("--gens", help="generator file (default: bundled Nielsen generators)")
    src.add_argument("--rank", type=int, help="rank for --word or the primitivity oracle")
    opt = common.add_argument_group("options")
    opt.add_argument("--period-policy", default="lcm", help="lcm | lcm:K | explicit:N | feighn-handel")
    opt.add_argument("--max-period", type=int, help="ignore powers above this")
    opt.add_argument("--leg-bound", type=int, help="override the leg length bound")
    opt.add_argument("--tolerance", type=float, default=1e-9)
    opt.add_argument("--seed", type=int, default=0)
    opt.add_argument("--jobs", type=int, default=1)
    opt.add_argument("--format", choices=("json", "text"), default="json")

    p = argparse.ArgumentParser(prog="iwip", description="Decide full irreducibility of free group automorphisms.")
    sub = p.add_subparsers(dest="command", required=True)
    d = sub.add_parser("decide", parents=[common], help="certified verdict")
    d.add_argument("--strict", action="store_true", help="refuse heuristic FullyIrreducible answers")
    d.add_argument("--fast", action="store_true", help="check Whitehead graphs before Nielsen paths")
    sub.add_parser("traintrack", parents=[common], help="train track representative")
    sub.add_parser("inps", parents=[common], help="indivisible Nielsen paths")
    sub.add_parser("pinps", parents=[common], help="periodic indivisible Nielsen paths")
    sub.add_parser("whitehead", parents=[common], help="vertex Whitehead graphs")
    sub.add_parser("atoroidal", parents=[common], help="(primitive) atoroidality")
    o = sub.add_parser("oracle", parents=[common], help="brute force cross-checks")
    o.add_argument("oracle", choices=("brute-inps", "periodic-classes", "primitive"))
    o.add_argument("--max-length", type=int, default=8)
    o.add_argument("--max-power", type=int, default=6)
    b = sub.add_parser("bench", parents=[common], help="seeded random walk benchmark")
    b.add_argument("--ranks", type=int, nargs="+", default=[3])
    b.add_argument("--samples", type=int, default=44)
    b.add_argument("--min-length", type=int, default=2)
    b.add_argument("--max-length", type=int, default=12)
    b.add_argument("--figure", help="write a log-log runtime plot here (PNG)")
    b.add_argument("--deterministic", action="store_true", help="drop timings from the report")
    return p


HANDLERS = {
    "decide": cmd_decide, "traintrack": cmd_traintrack, "inps": cmd_inps, "pinps": cmd_pinps,
    "whitehead": cmd_whitehead, "atoroidal": cmd_atoroidal, "oracle": cmd_oracle, "bench": cmd_bench,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        payload, code = HANDLERS[args.command](args)
    except (ValueError, KeyError, OSError, PeriodPolicyRefused, RuntimeError) as exc:
        emit({"error": f"{type(exc).__name__}: {exc}"}, args.format)
        return EXIT_ERROR
    emit(payload, args.format)
    return code


if __name__ == "__main__":
    sys.exit(main())
