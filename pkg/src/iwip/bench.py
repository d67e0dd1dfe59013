"""Seeded random-walk benchmark over a generating set of Out(F_N)."""

from __future__ import annotations

import json
import math
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .graphmap import rose_representative
from .words import Automorphism


def _generator_data(path: str | Path | None) -> dict:
    if path is None:
        return json.loads(resources.files("iwip").joinpath("data/nielsen_generators.json").read_text())
    return json.loads(Path(path).read_text())


def _by_rank(data: dict) -> bool:
    return bool(data) and all(k.isdigit() for k in data)


def load_generators(path: str | Path | None = None, rank: int | None = None) -> dict[str, Automorphism]:
    """Generator symbols to automorphisms.

    The file is either ``{name: "a->ab; b->b", ...}`` or keyed by rank,
    ``{"2": {...}, "3": {...}}``; the bundled Nielsen generators use the latter.
    """
    data = _generator_data(path)
    if _by_rank(data):
        if rank is None:
            raise ValueError("this generator file covers several ranks; pick one")
        if str(rank) not in data:
            raise ValueError(f"no generators for rank {rank}")
        data = data[str(rank)]
    return {name: Automorphism.parse(spec, rank) for name, spec in data.items()}


def generator_ranks(path: str | Path | None = None) -> list[int]:
    """Ranks covered by a rank-keyed generator file; empty for a flat file."""
    data = _generator_data(path)
    return sorted(int(k) for k in data) if _by_rank(data) else []


@dataclass(frozen=True)
class BenchConfig:
    ranks: tuple[int, ...] = (3,)
    walk_lengths: tuple[int, ...] = tuple(range(2, 13))
    samples: int = 44
    seed: int = 0
    generators: str | None = None  # path; None means the bundled Nielsen generators
    policy: str = "lcm"
    max_period: int | None = None
    tolerance: float = 1e-9


def random_walk(gens: Mapping[str, Automorphism], length: int, rng: random.Random) -> list[tuple[str, int]]:
    names = sorted(gens)
    return [(rng.choice(names), rng.choice((1, -1))) for _ in range(length)]


def walk_text(walk: Sequence[tuple[str, int]]) -> str:
    return " ".join(name if e == 1 else f"{name}^{e}" for name, e in walk)


def _plan(config: BenchConfig) -> list[dict]:
    rng = random.Random(config.seed)
    gen_sets = {N: load_generators(config.generators, N) for N in config.ranks}
    plan = []
    for i in range(config.samples):
        N = rng.choice(config.ranks)
        L = config.walk_lengths[i % len(config.walk_lengths)]
        plan.append({"index": i, "rank": N, "walk_length": L, "word": walk_text(random_walk(gen_sets[N], L, rng))})
    return plan


def _run_sample(args: tuple[dict, BenchConfig]) -> tuple[dict, float]:
    from .decide import bound_violations, compose_word, decide
    from .nielsen import parse_policy

    item, config = args
    gens = load_generators(config.generators, item["rank"])
    phi = compose_word(item["word"], gens, item["rank"])
    f0 = rose_representative(phi)
    row = dict(item, aut=phi.format(), input_norm=f0.norm())
    t0 = time.perf_counter()
    try:
        v = decide(f0, parse_policy(config.policy), config.max_period, tol=config.tolerance)
    except Exception as exc:  # a sample failure is data, not a crash of the run
        row.update(error=f"{type(exc).__name__}: {exc}")
        return row, time.perf_counter() - t0
    seconds = time.perf_counter() - t0
    row.update(
        verdict=v.outcome,
        certificate=v.certificate.kind,
        policy_relative=v.policy_relative,
        bh_steps=v.stats["bh_steps"],
        bh_folds=v.stats["bh_folds"],
        lam=v.stats.get("lambda"),
        pinps=v.stats.get("pinps"),
        violations=bound_violations(v, f0, config.tolerance),
    )
    return row, seconds


def loglog_fit(xs: Sequence[float], ys: Sequence[float]) -> dict:
    """Least squares fit of log y against log x; slope and R^2."""
    pts = [(math.log(x), math.log(y)) for x, y in zip(xs, ys) if x > 0 and y > 0]
    if len({p[0] for p in pts}) < 2:
        return {"slope": None, "intercept": None, "r2": None, "points": len(pts)}
    X = np.array([p[0] for p in pts])
    Y = np.array([p[1] for p in pts])
    slope, intercept = np.polyfit(X, Y, 1)
    resid = Y - (slope * X + intercept)
    ss_tot = float(((Y - Y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return {"slope": float(slope), "intercept": float(intercept), "r2": r2, "points": len(pts)}


FIT_NOTE = "empirical fit of runtime against input norm; not a proof of polynomial time"


def bench_run(config: BenchConfig, jobs: int = 1) -> dict:
    """Everything outside the ``timing`` key is a pure function of the config."""
    plan = _plan(config)
    args = [(item, config) for item in plan]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_sample, args))
    else:
        results = [_run_sample(a) for a in args]
    rows = [r for r, _ in results]
    seconds = [s for _, s in results]
    done = [r for r in rows if "error" not in r]
    tt = [r for r in done if r["certificate"] not in ("Reduction", "FiniteOrder")]
    summary = {
        "samples": len(rows),
        "errors": len(rows) - len(done),
        "fully_irreducible": sum(r["verdict"] == "FullyIrreducible" for r in done),
        "violations": sum(len(r["violations"]) for r in done),
        "max_bh_steps": max((r["bh_steps"] for r in done), default=0),
        "no_pinp_fraction": (sum(r["pinps"] == 0 for r in tt) / len(tt)) if tt else None,
    }
    ok = [(r["input_norm"], s) for r, s in zip(rows, seconds) if "error" not in r]
    fit = loglog_fit([x for x, _ in ok], [s for _, s in ok])
    fit["note"] = FIT_NOTE
    return {
        "config": asdict(config),
        "samples": rows,
        "summary": summary,
        "timing": {"seconds": seconds, "fit": fit},
    }


def deterministic_part(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "timing"}


def render_figure(report: dict, path: str | Path) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    xs, ys = [], []
    for row, s in zip(report["samples"], report["timing"]["seconds"]):
        if "error" not in row and s > 0:
            xs.append(row["input_norm"])
            ys.append(s)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(xs, ys, "o", ms=4, alpha=0.7, label="samples")
    fit = report["timing"]["fit"]
    if fit["slope"] is not None and xs:
        grid = np.geomspace(min(xs), max(xs), 50)
        ax.loglog(grid, np.exp(fit["intercept"]) * grid ** fit["slope"], "-",
                  label=f"slope {fit['slope']:.2f}, R² {fit['r2']:.2f}")
    ax.set_xlabel("input norm")
    ax.set_ylabel("decide runtime (s)")
    ax.set_title("runtime vs input norm (not a proof)")
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
