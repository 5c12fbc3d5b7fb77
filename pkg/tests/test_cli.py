import json

import pytest

from antnest.cli import (
    EXIT_DIVERGED,
    EXIT_IO,
    EXIT_UNKNOWN_FUNCTION,
    EXIT_USAGE,
    UsageError,
    main,
    parse,
)
from antnest.harness import parse_csv


def test_parse_fills_defaults():
    inv = parse(["run", "--function", "sphere", "--seed", "42"])
    assert inv.subcommand == "run"
    f = inv.flags
    assert (f["agents"], f["iters"], f["dim"], f["bounds"], f["scope"], f["impl"], f["seed"]) == \
           (30, 500, 10, (-100.0, 100.0), "element", "vector", 42)
    assert parse(["run"]).flags["seed"] == 1


def test_parse_bad_bounds_names_flag():
    with pytest.raises(UsageError, match="--bounds"):
        parse(["run", "--bounds", "100:-100"])
    with pytest.raises(UsageError, match="--bounds"):
        parse(["run", "--bounds", "7"])


def test_negative_bounds_accepted_without_equals():
    assert parse(["run", "--bounds", "-5:5"]).flags["bounds"] == (-5.0, 5.0)


@pytest.mark.parametrize("argv,flag", [
    (["run", "--dim", "0"], "--dim"),
    (["run", "--agents", "x"], "--agents"),
    (["run", "--impl", "gpu"], "--impl"),
    (["run", "--scope", "row"], "--scope"),
    (["run", "--format", "xml"], "--format"),
    (["run", "--seed", "-3"], "--seed"),
])
def test_parse_errors_name_flag(argv, flag):
    with pytest.raises(UsageError, match=flag):
        parse(argv)


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("# experiment\niters = 200\nagents = 12  # fewer ants\nbounds = -5:5\n\n")
    inv = parse(["run", "--config", str(cfg), "--iters", "50"])
    assert inv.flags["iters"] == 50
    assert inv.flags["agents"] == 12
    assert inv.flags["bounds"] == (-5.0, 5.0)
    assert inv.config_file == str(cfg)


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    with pytest.raises(UsageError, match="unknown key"):
        parse(["run", "--config", str(bad)])
    with pytest.raises(UsageError, match="--config"):
        parse(["run", "--config", str(tmp_path / "missing.cfg")])


def test_usage_error_exit_code(capsys):
    assert main(["run", "--bounds", "100:-100"]) == EXIT_USAGE
    assert "--bounds" in capsys.readouterr().err
    assert main(["frobnicate"]) == EXIT_USAGE


def test_unknown_function_exit_code(capsys):
    assert main(["run", "--function", "nosuchfn"]) == EXIT_UNKNOWN_FUNCTION
    assert "sphere" in capsys.readouterr().err


def test_io_failure_exit_code(tmp_path):
    out = tmp_path / "no" / "such" / "dir" / "x.csv"
    assert main(["run", "--iters", "2", "--out", str(out)]) == EXIT_IO


def test_equiv_exit_zero(capsys):
    assert main(["equiv", "--function", "sphere", "--seed", "7"]) == 0
    assert capsys.readouterr().out.startswith("PASS")


def test_equiv_divergence_exit_code(monkeypatch, capsys):
    from functools import partial

    from antnest import harness
    from antnest.harness import Backend
    from antnest.vector import init_state_vector, step_vector

    def hook(iteration, masks):
        a, b, c = (m.copy() for m in masks)
        if iteration == 2:
            a[0, 0], b[0, 0], c[0, 0] = not a[0, 0], a[0, 0], False
        return a, b, c

    faulty = Backend("vector", init_state_vector, partial(step_vector, mask_hook=hook))
    monkeypatch.setitem(harness.BACKENDS, "vector", faulty)
    assert main(["equiv", "--iters", "10"]) == EXIT_DIVERGED
    assert "iteration 2" in capsys.readouterr().out


def test_run_writes_trace(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["run", "--iters", "20", "--impl", "scalar", "--out", str(out)]) == 0
    header, rows = parse_csv(out.read_text())
    assert header == ["iteration", "best_fitness", "best_agent_index"]
    assert len(rows) == 20


def test_run_json_stdout(capsys):
    assert main(["run", "--iters", "3", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["trace"]) == 3


def test_trajectory_row_count(tmp_path):
    out = tmp_path / "t.csv"
    assert main(["trajectory", "--function", "sphere", "--dim", "2", "--iters", "10", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "iteration,agent,d0,d1"
    assert len(lines) == 1 + 10 * 30


def test_bench_two_rows_identical_stats(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["bench", "--function", "sphere", "--runs", "4", "--iters", "30", "--out", str(out)]) == 0
    header, rows = parse_csv(out.read_text())
    assert header == ["function", "backend", "runs", "mean_best", "std_best", "mean_seconds"]
    assert [(r["function"], r["backend"]) for r in rows] == [("sphere", "scalar"), ("sphere", "vector")]
    assert rows[0]["mean_best"] == rows[1]["mean_best"]
    assert rows[0]["std_best"] == rows[1]["std_best"]


def test_bench_defaults_to_whole_registry():
    inv = parse(["bench"])
    assert inv.functions()[0] == "sphere" and len(inv.functions()) == 9


def test_compare_csv(tmp_path, capsys):
    out = tmp_path / "c.csv"
    assert main(["compare", "--iters", "10", "--warmups", "0", "--reps", "1", "--out", str(out)]) == 0
    header, rows = parse_csv(out.read_text())
    assert header == ["function", "scalar_seconds", "vector_seconds", "speedup", "equivalent"]
    assert rows[0]["equivalent"] == "true"
    assert capsys.readouterr().err == ""


def test_multiple_functions_only_for_bench():
    assert main(["run", "--function", "sphere,ackley"]) == EXIT_USAGE
