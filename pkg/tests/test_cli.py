import json
import math
import subprocess
import sys

import numpy as np
import pytest

from qubit_reset import Case, ResetTask, classify
from qubit_reset.bounded import tau_c1
from qubit_reset.cli import main
from qubit_reset.formats import parse_trajectory


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_unbounded_writes_files(tmp_path, capsys):
    traj = tmp_path / "traj.csv"
    res = tmp_path / "res.json"
    code, out, _ = run(capsys, "solve", "--tau", "25", "--epsilon", "1e-3",
                       "--out", str(traj), "--json", str(res))
    assert code == 0
    data = json.loads(out)
    assert json.loads(res.read_text()) == data
    assert data["case"] == "unbounded"
    assert data["w_ex"] > 0 and data["iterations"] > 0 and data["residual"] < 1e-10
    assert data["artifacts"] == [str(traj), str(res)]
    text = traj.read_text()
    assert text.startswith("t,p_e,lambda_H\n") and "\r" not in text
    _, _, lam = parse_trajectory(text)
    assert np.all(np.diff(lam) > 0)


def test_solve_touched_reports_touch_time(capsys):
    code, out, _ = run(capsys, "solve", "--tau", "20", "--epsilon", "1e-5", "--lambda-max", "15",
                       "--samples", "100")
    data = json.loads(out)
    assert code == 0
    assert data["case"] == "touched"
    assert 0 < data["t_star"] < 20
    assert data["j1"] + data["j2"] == pytest.approx(data["j"])


def test_solve_inaccessible_exits_2(capsys):
    code, out, _ = run(capsys, "solve", "--tau", "5", "--epsilon", "1e-5", "--lambda-max", "15")
    data = json.loads(out)
    assert code == 2
    assert data["reason"] == "inaccessible"
    assert data["tau_c1"] == pytest.approx(10.85, abs=0.01)


def test_solve_infeasible_exits_2(capsys):
    code, out, _ = run(capsys, "solve", "--tau", "50", "--epsilon", "1e-5", "--lambda-max", "11")
    assert code == 2
    assert json.loads(out)["reason"] == "infeasible"


def test_solve_rejects_bad_flags(capsys):
    with pytest.raises(SystemExit):
        main(["solve", "--tau", "-1", "--epsilon", "0.1"])
    code, _, err = run(capsys, "solve", "--tau", "1", "--epsilon", "0.7")
    assert code == 1 and "epsilon" in err


def test_critical_times(capsys):
    code, out, _ = run(capsys, "critical-times", "--lambda-max", "15", "--epsilon", "1e-5",
                       "--method", "direct")
    data = json.loads(out)
    assert code == 0
    assert data["tau_c1"] == pytest.approx(10.85, abs=0.1)
    assert data["tau_c2"] > data["tau_c1"]
    code, out, _ = run(capsys, "critical-times", "--lambda-max", "11", "--epsilon", "1e-5")
    assert code == 2
    assert json.loads(out)["threshold"] == pytest.approx(11.513, abs=1e-3)
    code, out, _ = run(capsys, "critical-times", "--lambda-max", "30", "--epsilon", "1e-5",
                       "--method", "direct")
    assert json.loads(out)["tau_c1"] == pytest.approx(math.log(1 / 2e-5), abs=1e-3)


def test_sweep_over_tau(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code, _, _ = run(capsys, "sweep", "--epsilon", "1e-3", "--tau-min", "20", "--tau-max", "80",
                     "--points", "3", "--log", "--out", str(out))
    rows = out.read_text().splitlines()
    assert code == 0
    assert rows[0] == "tau,epsilon,case,W_ex,J"
    w = [float(r.split(",")[3]) for r in rows[1:]]
    assert len(w) == 3 and w[0] > w[1] > w[2]


def test_sweep_over_epsilon(capsys):
    code, out, _ = run(capsys, "sweep", "--tau", "100", "--eps-min", "1e-4", "--eps-max", "1e-2",
                       "--points", "3", "--log")
    w = [float(r.split(",")[3]) for r in out.splitlines()[1:]]
    assert code == 0 and w[0] > w[1] > w[2]


def test_bounded_sweep_marks_inaccessible(capsys):
    code, out, _ = run(capsys, "sweep", "--epsilon", "1e-5", "--tau-min", "5", "--tau-max", "30",
                       "--points", "3", "--lambda-max", "15")
    rows = [r.split(",") for r in out.splitlines()[1:]]
    assert code == 0
    assert rows[0][2:] == ["inaccessible", "", ""]
    assert [r[2] for r in rows[1:]] == ["touched", "touched"]


def test_sweep_flag_validation(capsys):
    code, _, err = run(capsys, "sweep", "--points", "3")
    assert code == 1 and "exactly one" in err


def test_sweep_is_deterministic_under_concurrency(capsys):
    args = ["sweep", "--epsilon", "1e-3", "--tau-min", "20", "--tau-max", "60", "--points", "4"]
    _, serial, _ = run(capsys, *args)
    _, parallel, _ = run(capsys, *args, "--jobs", "2")
    assert serial == parallel


def test_case_diagram(tmp_path, capsys):
    out = tmp_path / "diagram.csv"
    code, _, _ = run(capsys, "case-diagram", "--lambda-max", "15", "--tau-min", "1", "--tau-max", "150",
                     "--eps-min", "1e-6", "--eps-max", "1e-1", "--grid", "8x4", "--out", str(out))
    assert code == 0
    rows = [r.split(",") for r in out.read_text().splitlines()[1:]]
    assert len(rows) == 32
    for tau, eps, case in rows:
        assert classify(ResetTask(float(tau), float(eps), 15.0), locate_touch=False).variant.value == case
    curves = [r.split(",") for r in (tmp_path / "diagram_boundaries.csv").read_text().splitlines()[1:]]
    for eps, c1, _ in curves:
        assert float(c1) == pytest.approx(tau_c1(15.0, float(eps)), rel=1e-14)


def test_case_diagram_rejects_bad_grid(capsys):
    with pytest.raises(SystemExit):
        main(["case-diagram", "--lambda-max", "15", "--tau-min", "1", "--tau-max", "2",
              "--eps-min", "1e-3", "--eps-max", "1e-2", "--grid", "ten"])


def test_simulate_round_trip(tmp_path, capsys):
    proto = tmp_path / "proto.csv"
    run(capsys, "solve", "--tau", "25", "--epsilon", "1e-3", "--protocol-out", str(proto))
    code, out, _ = run(capsys, "simulate", "--protocol", str(proto), "--out", str(tmp_path / "s.csv"))
    data = json.loads(out)
    assert code == 0
    assert data["reset_error"] == pytest.approx(1e-3, rel=1e-3)
    assert data["work_direct"] == pytest.approx(data["j"], rel=1e-4)


def test_simulate_constant_protocol(tmp_path, capsys):
    t1 = tau_c1(15.0, 1e-5)
    proto = tmp_path / "flat.csv"
    proto.write_text(f"t,lambda_H\n0,15\n{t1!r},15\n")
    code, out, _ = run(capsys, "simulate", "--protocol", str(proto))
    assert code == 0
    assert json.loads(out)["reset_error"] == pytest.approx(1e-5, rel=1e-8)


def test_simulate_rejects_bad_files(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    code, _, err = run(capsys, "simulate", "--protocol", str(empty))
    assert code == 1 and "empty" in err
    bad = tmp_path / "bad.csv"
    bad.write_text("t,lambda_H\n0,0\n1,x\n")
    code, _, err = run(capsys, "simulate", "--protocol", str(bad))
    assert code == 1 and "line 3" in err
    code, _, err = run(capsys, "simulate", "--protocol", str(tmp_path / "missing.csv"))
    assert code == 1


def test_output_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    _, out_a, _ = run(capsys, "solve", "--tau", "20", "--epsilon", "1e-5", "--lambda-max", "15",
                      "--samples", "50", "--out", str(a))
    _, out_b, _ = run(capsys, "solve", "--tau", "20", "--epsilon", "1e-5", "--lambda-max", "15",
                      "--samples", "50", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()
    assert out_a.replace("a.csv", "b.csv") == out_b


def test_help_mentions_units_and_hardware_example(capsys):
    with pytest.raises(SystemExit):
        main(["solve", "--help"])
    out = capsys.readouterr().out
    assert "dimensionless" in out and "--lambda-max 5" in out


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "qubit_reset", "critical-times", "--lambda-max", "15",
         "--epsilon", "1e-5", "--method", "direct"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["tau_c1"] == pytest.approx(10.85, abs=0.01)
