import json
import math

import pytest

from seqstop.cli import main
from seqstop.fixed_ci import SampleSummary, _div_above, _div_below, _phi_ext
from seqstop.schedules import StageSchedule


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_stream(tmp_path, values, name="stream.txt"):
    path = tmp_path / name
    path.write_text("\n".join(str(v) for v in values) + "\n")
    return str(path)


def test_plan_round_trips(capsys):
    code, out, _ = run_cli(capsys, "plan", "--rule", "A",
                           "--epsilon", "0.1", "--delta", "0.05",
                           "--stages", "5")
    assert code == 0
    sched = StageSchedule.from_json(out)
    assert sched.stages == (51, 77, 117, 176, 265)


def test_plan_unbounded_json(capsys):
    code, out, _ = run_cli(capsys, "plan", "--rule", "C", "--m1", "50")
    assert code == 0
    doc = json.loads(out)
    assert doc["unbounded"] is True


def test_run_constant_stream(capsys, tmp_path):
    path = write_stream(tmp_path, [1.0] * 60)
    code, out, _ = run_cli(capsys, "run", "--rule", "A", "--input", path)
    assert code == 0
    doc = json.loads(out)
    assert doc["status"] == "stopped"
    assert doc["n"] == 51


def test_run_empty_stream_is_data_error(capsys, tmp_path):
    path = write_stream(tmp_path, [])
    code, out, err = run_cli(capsys, "run", "--rule", "A", "--input", path)
    assert code == 3


def test_run_bad_observation_is_data_error(capsys, tmp_path):
    path = write_stream(tmp_path, [0.5, 2.5])
    code, _, err = run_cli(capsys, "run", "--rule", "A", "--input", path)
    assert code == 3
    assert "error" in err


def test_usage_error_exit_code(capsys):
    code, _, _ = run_cli(capsys, "plan", "--rule", "Q")
    assert code == 2
    code, _, _ = run_cli(capsys, "run", "--epsilon", "0.9")
    assert code == 2


def test_ci_on_zero_stream(capsys, tmp_path):
    path = write_stream(tmp_path, [0.0] * 100)
    code, out, _ = run_cli(capsys, "ci", "--input", path)
    assert code == 0
    doc = json.loads(out)
    assert doc["L"] == 0.0
    assert 0.0 < doc["U"] < 0.1


def test_ci_delta_widens(capsys, tmp_path):
    path = write_stream(tmp_path, [0.0, 1.0] * 50)
    _, out_tight, _ = run_cli(capsys, "ci", "--input", path,
                              "--delta", "0.2")
    _, out_wide, _ = run_cli(capsys, "ci", "--input", path,
                             "--delta", "0.01")
    tight = json.loads(out_tight)
    wide = json.loads(out_wide)
    assert wide["L"] <= tight["L"]
    assert wide["U"] >= tight["U"]


def test_simulate_fixed_seed_reproducible(capsys):
    argv = ("simulate", "--procedure", "A", "--dist", "bernoulli",
            "--p", "0.3", "--seed", "5", "--reps", "25")
    _, first, _ = run_cli(capsys, *argv)
    _, second, _ = run_cli(capsys, *argv)
    assert first == second
    doc = json.loads(first)
    assert doc["replications"] == 25


def test_simulate_workers_do_not_change_result(capsys):
    base = ("simulate", "--procedure", "A", "--dist", "bernoulli",
            "--p", "0.3", "--seed", "5", "--reps", "24")
    _, serial, _ = run_cli(capsys, *base, "--workers", "1")
    _, parallel, _ = run_cli(capsys, *base, "--workers", "3")
    assert serial == parallel


def test_simulate_zero_reps(capsys):
    code, out, _ = run_cli(capsys, "simulate", "--reps", "0")
    assert code == 0
    doc = json.loads(out)
    assert doc["replications"] == 0
    assert doc["coverage"] == 0.0


def test_simulate_ci_requires_fixed_n(capsys):
    code, _, err = run_cli(capsys, "simulate", "--procedure", "ci",
                           "--reps", "5")
    assert code == 2
    assert "fixed-n" in err


def test_region_csv_rows_satisfy_equations(capsys, tmp_path):
    values = [0.0] * 60 + [1.0] * 40
    path = write_stream(tmp_path, values)
    code, out, _ = run_cli(capsys, "region", "--input", path,
                           "--resolution", "20")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "curve,nu,vartheta"
    summary = SampleSummary(n=100, mean=0.4, var=0.24)
    thr = math.log(4.0 / 0.05) / 100
    for line in lines[1:]:
        curve, nu_s, th_s = line.split(",")
        nu, th = float(nu_s), float(th_s)
        if curve in ("C1", "D1"):
            assert abs(th - nu * (1 - nu)) < 1e-6
        elif curve == "C2":
            assert abs(_div_above(summary.mean, nu, th) - thr) < 1e-6
        elif curve == "D2":
            assert abs(_div_below(summary.mean, nu, th) - thr) < 1e-6
        else:
            assert abs(_phi_ext(summary.w(nu), th) - thr) < 1e-6


def test_region_json_format(capsys, tmp_path):
    path = write_stream(tmp_path, [0.0, 1.0] * 40)
    code, out, _ = run_cli(capsys, "region", "--input", path,
                           "--resolution", "10", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["n"] == 80
    assert doc["points"]


def test_config_defaults_apply(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"epsilon": 0.2, "stages": 3}))
    code, out, _ = run_cli(capsys, "--config", str(cfg), "plan",
                           "--rule", "A")
    assert code == 0
    doc = json.loads(out)
    assert doc["epsilon"] == 0.2
    assert len(doc["stages"]) == 3


def test_config_missing_file(capsys):
    code, _, err = run_cli(capsys, "--config", "/nonexistent.json", "plan")
    assert code == 2
