import json

from iwip.bench import BenchConfig, bench_run, deterministic_part, generator_ranks, load_generators, loglog_fit


def test_bundled_generators_cover_small_ranks():
    assert generator_ranks() == [2, 3, 4]
    gens = load_generators(None, 3)
    assert gens["r12"].format() == "a->ab; b->b; c->c"
    assert gens["p23"].format() == "a->a; b->c; c->b"


def test_zero_samples_gives_empty_report():
    r = bench_run(BenchConfig(samples=0))
    assert r["samples"] == [] and r["summary"]["samples"] == 0


def test_fixed_seed_is_byte_identical():
    cfg = BenchConfig(ranks=(2,), walk_lengths=(3, 4), samples=5, seed=11)
    a = json.dumps(deterministic_part(bench_run(cfg)), sort_keys=True)
    b = json.dumps(deterministic_part(bench_run(cfg, jobs=2)), sort_keys=True)
    assert a == b


def test_loglog_fit_recovers_power_law():
    xs = [2, 4, 8, 16, 32]
    fit = loglog_fit(xs, [3 * x ** 2 for x in xs])
    assert abs(fit["slope"] - 2) < 1e-9 and abs(fit["r2"] - 1) < 1e-9
    assert loglog_fit([3, 3], [1, 2])["slope"] is None
