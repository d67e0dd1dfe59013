import json

import pytest

from iwip.cli import EXIT_DECIDED, EXIT_ERROR, EXIT_RELATIVE, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_decide_json(capsys):
    code, out = run(capsys, "decide", "--aut", "a->ab; b->a")
    assert code == EXIT_DECIDED
    data = json.loads(out)
    assert data["verdict"] == "FullyIrreducible"
    assert data["certificate"]["kind"] == "WeaklyCleanAndPrimitivelyAtoroidal"
    assert {"verdict", "certificate", "stats"} <= set(data)


def test_decide_text(capsys):
    code, out = run(capsys, "decide", "--aut", "a->ab; b->b", "--format", "text")
    assert code == EXIT_DECIDED
    assert "verdict: NotFullyIrreducible" in out
    assert "kind: Reduction" in out


def test_decide_word_with_bundled_generators(capsys):
    code, out = run(capsys, "decide", "--word", "r12 p12")
    assert code == EXIT_DECIDED
    assert json.loads(out)["verdict"] == "FullyIrreducible"


def test_decide_map_file_round_trip(capsys, tmp_path):
    code, out = run(capsys, "traintrack", "--aut", "a->Babb; b->Bab")
    path = tmp_path / "tt.json"
    path.write_text(json.dumps(json.loads(out)["map"]))
    code, out = run(capsys, "decide", "--map", str(path))
    assert code == EXIT_DECIDED
    assert json.loads(out)["verdict"] == "FullyIrreducible"


def test_custom_generator_file(capsys, tmp_path):
    gens = tmp_path / "gens.json"
    gens.write_text(json.dumps({"s": "a->ab; b->a", "t": "a->b; b->a"}))
    code, out = run(capsys, "decide", "--word", "s s t^-1", "--gens", str(gens))
    assert code in (EXIT_DECIDED, EXIT_RELATIVE)
    assert "verdict" in json.loads(out)


def test_errors_exit_one(capsys):
    code, out = run(capsys, "decide", "--aut", "a->aa; b->b")
    assert code == EXIT_ERROR
    assert "Nielsen" in json.loads(out)["error"]
    code, _ = run(capsys, "decide")
    assert code == EXIT_ERROR
    code, _ = run(capsys, "decide", "--word", "nope")
    assert code == EXIT_ERROR


def test_strict_refusal_exits_two(capsys):
    code, out = run(capsys, "decide", "--aut", "a->ab; b->a", "--strict")
    assert code == EXIT_RELATIVE
    assert json.loads(out)["verdict"] == "Undecided"


def test_feighn_handel_fallback_exits_two(capsys):
    code, out = run(capsys, "decide", "--aut", "a->ab; b->a", "--period-policy", "feighn-handel")
    assert code == EXIT_RELATIVE
    assert json.loads(out)["policy_relative"] is True


@pytest.mark.parametrize("cmd", ["traintrack", "inps", "pinps", "whitehead", "atoroidal"])
def test_subcommands_run(capsys, cmd):
    code, out = run(capsys, cmd, "--aut", "a->ab; b->a")
    assert code == EXIT_DECIDED
    json.loads(out)


def test_pinps_explicit_period(capsys):
    code, out = run(capsys, "pinps", "--aut", "a->ab; b->a", "--period-policy", "explicit:2")
    data = json.loads(out)
    assert data["powers_searched"] == [2]
    assert [p["period"] for p in data["pinps"]] == [2]


def test_atoroidal_output(capsys):
    _, out = run(capsys, "atoroidal", "--aut", "a->ab; b->a")
    data = json.loads(out)
    assert data["atoroidal"] is False and data["primitively_atoroidal"] is True


def test_reducible_input_to_inps_is_an_error(capsys):
    code, _ = run(capsys, "inps", "--aut", "a->ab; b->b")
    assert code == EXIT_ERROR


def test_oracles(capsys):
    _, out = run(capsys, "oracle", "primitive", "--word", "abAB")
    assert json.loads(out)["primitive"] is False
    _, out = run(capsys, "oracle", "periodic-classes", "--aut", "a->ab; b->a", "--max-length", "4", "--max-power", "2")
    assert json.loads(out)["classes"]
    _, out = run(capsys, "oracle", "brute-inps", "--aut", "a->aba; b->ab")
    assert len(json.loads(out)["inps"]) == 1


def test_bench_small(capsys, tmp_path):
    fig = tmp_path / "bench.png"
    code, out = run(capsys, "bench", "--samples", "4", "--ranks", "2", "--max-length", "4",
                    "--seed", "3", "--figure", str(fig))
    assert code == EXIT_DECIDED
    data = json.loads(out)
    assert data["summary"]["samples"] == 4
    assert fig.exists() and fig.stat().st_size > 0
