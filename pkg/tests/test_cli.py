from __future__ import annotations

import json
import subprocess
import sys

import pytest

from utgplan.cli import main
from utgplan.datasets import calendar_path
from utgplan.pddl import read_problem, tokenize_pddl
from utgplan.utg import build_utg, save_utg

CAL = str(calendar_path())


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_plan_found(capsys):
    code, out, err = run(capsys, "plan", CAL, "--init", "SplashActivity", "--target", "ManageEventTypesActivity")
    assert code == 0 and err == ""
    doc = json.loads(out)
    assert doc["status"] == "found"
    assert doc["cost"] == 3
    assert doc["steps"][0] == ["SplashActivity", "MainActivity"]
    assert "IMMEDIATE NEXT ACTION:" in doc["guide"]


def test_plan_text_format(capsys):
    code, out, _ = run(capsys, "plan", CAL, "--init", "SplashActivity", "--target", "ManageEventTypesActivity", "--format", "text")
    assert code == 0
    assert out.startswith("(navigate SplashActivity MainActivity)\n")
    assert "; cost = 3 (unit cost)" in out


def test_plan_same_node(capsys):
    code, out, _ = run(capsys, "plan", CAL, "--init", "MainActivity", "--target", "MainActivity")
    assert code == 0
    assert json.loads(out)["steps"] == []


def test_plan_unreachable(capsys):
    code, out, _ = run(capsys, "plan", CAL, "--init", "ContributorsActivity", "--target", "MainActivity")
    assert code == 3
    doc = json.loads(out)
    assert doc["status"] == "unreachable"
    assert "ALL AVAILABLE NAVIGATION OPTIONS" in doc["fallback"]


def test_plan_goal_text_and_precedence(capsys):
    code, out, _ = run(capsys, "plan", CAL, "--init", "SplashActivity", "--goal", "change the time zone")
    assert code == 0 and json.loads(out)["target"] == "SelectTimeZoneActivity"
    code, out, _ = run(capsys, "plan", CAL, "--init", "SplashActivity", "--goal", "change the time zone", "--target", "AboutActivity")
    assert json.loads(out)["target"] == "AboutActivity"


@pytest.mark.parametrize(
    "argv",
    [
        ["plan", CAL, "--init", "SplashActivity"],
        ["plan", CAL, "--init", "Nope", "--target", "MainActivity"],
        ["plan", CAL, "--init", "SplashActivity", "--target", "Nope"],
        ["plan", "/does/not/exist.json", "--init", "A", "--target", "B"],
        ["plan", CAL, "--init", "SplashActivity", "--target", "MainActivity", "--k", "0"],
    ],
)
def test_plan_usage_errors(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert out == ""
    assert err.startswith("error:")


def test_schema_error_names_field(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"app": "x", "nodes": [{"id": 1, "label_text": "", "actions": []}], "edges": []}')
    code, _, err = run(capsys, "plan", str(bad), "--init", "A", "--target", "A")
    assert code == 2 and "nodes[0].id" in err


def test_missing_flag_is_usage_error(capsys, tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["emit-pddl", CAL, "--init", "SplashActivity", "--out-dir", str(tmp_path)])
    assert info.value.code == 2


def test_emit_pddl(capsys, tmp_path, data_dir):
    code, out, _ = run(
        capsys, "emit-pddl", CAL, "--init", "SplashActivity", "--target", "SelectTimeZoneActivity",
        "--out-dir", str(tmp_path), "--name", "change-time-zone",
    )
    assert code == 0
    problem = (tmp_path / "problem.pddl").read_text()
    assert read_problem(problem) == read_problem((data_dir / "listing_problem.pddl").read_text())
    assert ":conditional-effects" in tokenize_pddl((tmp_path / "domain.pddl").read_text())
    first = (tmp_path / "problem.pddl").read_bytes()
    run(capsys, "emit-pddl", CAL, "--init", "SplashActivity", "--target", "SelectTimeZoneActivity",
        "--out-dir", str(tmp_path), "--name", "change-time-zone")
    assert (tmp_path / "problem.pddl").read_bytes() == first


def test_ingest_round_trip(capsys, tmp_path, data_dir):
    out_path = tmp_path / "g.json"
    code, out, _ = run(capsys, "ingest", str(data_dir / "listing_problem.pddl"), "--out", str(out_path))
    assert code == 0
    doc = json.loads(out)
    assert (doc["nodes"], doc["edges"], doc["init"]) == (12, 13, "SplashActivity")
    code, out, _ = run(capsys, "plan", str(out_path), "--init", "SplashActivity", "--target", "SelectTimeZoneActivity")
    assert code == 0 and json.loads(out)["cost"] == 3


def test_simulate_success_and_failure(capsys, tmp_path):
    trace = tmp_path / "trace.jsonl"
    code, out, _ = run(capsys, "simulate", CAL, "--init", "SplashActivity", "--goal", "manage event types", "--trace", str(trace))
    doc = json.loads(out)
    assert code == 0 and doc["outcome"] == "Success" and doc["steps_taken"] == 3
    assert doc["wall_time_s"] is None
    assert len(trace.read_text().splitlines()) == 3
    code, out, _ = run(capsys, "simulate", CAL, "--init", "SplashActivity", "--target", "ManageEventTypesActivity", "--max-steps", "1")
    assert code == 4 and json.loads(out)["steps_taken"] == 1


def test_simulate_timing(capsys):
    code, out, _ = run(capsys, "simulate", CAL, "--init", "SplashActivity", "--target", "MainActivity", "--timing")
    assert code == 0 and json.loads(out)["wall_time_s"] >= 0


@pytest.mark.parametrize(
    "extra",
    [["--perturb", "0.1,0.2"], ["--perturb", "2,0,0"], ["--max-steps", "0"], ["--p-fail", "1"], ["--policy", "psychic"]],
)
def test_simulate_config_errors(capsys, extra):
    argv = ["simulate", CAL, "--init", "SplashActivity", "--target", "MainActivity", *extra]
    try:
        code, _, _ = run(capsys, *argv)
    except SystemExit as exc:  # argparse choices
        code = exc.code
    assert code == 2


def _bench_config(tmp_path, **overrides):
    cfg = {
        "tasks": [{"utg": CAL, "init": "SplashActivity", "goal": {"target": "ManageEventTypesActivity"}}],
        "policies": ["plan-follower", "uniform-random"],
        "repetitions": 3,
        "seed": 5,
        "perturb": {"drop_edge_prob": 0.0},
    }
    cfg.update(overrides)
    path = tmp_path / "bench.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def test_bench(capsys, tmp_path):
    code, out, _ = run(capsys, "bench", _bench_config(tmp_path))
    assert code == 0
    doc = json.loads(out)
    guided = [c for c in doc["cells"] if c["policy"] == "plan-follower+plan"][0]
    assert guided["episodes"] == 3 and guided["mean_steps"] == 3.0
    code, out, _ = run(capsys, "bench", _bench_config(tmp_path), "--format", "text")
    assert out.splitlines()[0].split() == ["task", "policy", "success_rate", "mean_steps", "mean_time_s"]


def test_bench_relative_paths(capsys, tmp_path):
    (tmp_path / "cal.json").write_text(open(CAL).read())
    cfg = _bench_config(tmp_path, tasks=[{"utg": "cal.json", "init": "SplashActivity", "goal": "manage event types"}])
    code, out, _ = run(capsys, "bench", cfg)
    assert code == 0


@pytest.mark.parametrize(
    "overrides",
    [{"tasks": []}, {"policies": ["x"]}, {"repetitions": 0}, {"bogus": 1}, {"tasks": [{"utg": CAL}]},
     {"tasks": [{"utg": CAL, "init": "SplashActivity", "goal": {"target": "Nope"}}]}, {"perturb": {"drop": 1}}],
)
def test_bench_config_errors(capsys, tmp_path, overrides):
    code, out, err = run(capsys, "bench", _bench_config(tmp_path, **overrides))
    assert code == 2 and out == "" and err


def test_stats(capsys, tmp_path):
    empty = tmp_path / "empty.json"
    empty.write_text(save_utg(build_utg([], [], "empty")))
    code, out, _ = run(capsys, "stats", CAL, str(empty), "--format", "text")
    assert code == 0
    assert [line.split()[1:] for line in out.splitlines()] == [["12", "13"], ["0", "0"]]


def test_stats_paired(capsys, tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    a.write_text("27.0\n29.3\n39.4\n23.8\n18.0\n")
    b.write_text("# failed\n71.2\n53.8\n42.0\n55.0\n50.7\n")
    code, out, _ = run(capsys, "stats", "--paired", str(a), str(b))
    assert code == 0
    assert json.loads(out)["pvalue"] == pytest.approx(0.0625)
    code, out, _ = run(capsys, "stats", "--paired", str(a), str(b), "--alternative", "less", "--format", "text")
    assert "p=0.03125" in out


def test_stats_paired_errors(capsys, tmp_path):
    a, b, c = tmp_path / "a.txt", tmp_path / "b.txt", tmp_path / "c.txt"
    a.write_text("1\n2\n")
    b.write_text("1\n2\n")
    c.write_text("1\n")
    assert run(capsys, "stats", "--paired", str(a), str(b))[0] == 2
    assert run(capsys, "stats", "--paired", str(a), str(c))[0] == 2
    assert run(capsys, "stats")[0] == 2


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "utgplan.cli", "stats", CAL, "--format", "text"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.split()[1:] == ["12", "13"]
