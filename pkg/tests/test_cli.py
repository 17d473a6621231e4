import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from reset_kernels.qspecial import q_pochhammer


def cli(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "reset_kernels", *args], capture_output=True, text=True, cwd=cwd)


def table(text):
    body = [line for line in text.splitlines() if not line.startswith("#")]
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    return rows[0], rows[1:]


def test_density_rows_integrate_to_one():
    res = cli("--m", "0.5", "density", "--t", "0.5,2,8", "--x", "0.3", "--y-grid", "-40:40:8001")
    assert res.returncode == 0, res.stderr
    cols, rows = table(res.stdout)
    assert cols[:4] == ["t", "x", "y", "p"]
    data = np.array([[float(r[0]), float(r[2]), float(r[3])] for r in rows])
    for t in (0.5, 2.0, 8.0):
        sel = data[data[:, 0] == t]
        assert np.trapezoid(sel[:, 2], sel[:, 1]) == pytest.approx(1.0, abs=1e-6)


def test_density_is_deterministic():
    args = ("--kernel", "symmetric", "--alpha", "1.4", "--c", "0.6", "density", "--t", "1,3", "--y-grid", "-5:5:21")
    a, b = cli(*args), cli(*args)
    assert a.returncode == 0 and a.stdout == b.stdout


def test_density_both_methods_agree():
    res = cli("--kernel", "cauchy", "--m", "0.4", "density", "--t", "0.7,4", "--y-grid", "-6:6:25", "--method", "both")
    assert res.returncode == 0, res.stderr
    cols, rows = table(res.stdout)
    i, j = cols.index("p_series"), cols.index("p_mixture")
    for r in rows:
        assert abs(float(r[i]) / float(r[j]) - 1) < 1e-8


def test_header_echoes_config_and_parameters():
    res = cli("--m", "0.25", "density", "--t", "1", "--y-grid", "0,1")
    lines = res.stdout.splitlines()
    assert lines[0].startswith("# reset_kernels ")
    cfg = json.loads(lines[1][len("# config ") :])
    assert cfg["m"] == 0.25 and cfg["c_derived"] == pytest.approx(0.5)
    assert lines[2].startswith("# seed")


def test_floats_round_trip():
    res = cli("--m", "0.5", "stationary", "--y-grid", "0.1,1.7")
    cols, rows = table(res.stdout)
    k = cols.index("rho")
    for r in rows:
        assert r[k] == f"{float(r[k]):.17g}"


def test_moments_limit_table():
    res = cli("--m", "0.5", "moments", "--t", "inf", "--gamma", "2", "--format", "json")
    assert res.returncode == 0, res.stderr
    doc = json.loads(res.stdout)
    rows = {r[1]: r for r in doc["rows"]}
    for k in range(1, 6):
        assert rows[float(k)][2] == pytest.approx(math.factorial(k) / q_pochhammer(0.5, 0.5, k), rel=1e-12)
    assert rows[2.0][3] == pytest.approx(4.0, rel=1e-12)


def test_moments_finite_time():
    res = cli("--m", "0.5", "moments", "--t", "2", "--kmax", "1", "--format", "json")
    doc = json.loads(res.stdout)
    assert doc["rows"][0][2] == pytest.approx((1 - math.exp(-1)) / 0.5, rel=1e-12)


def test_asymptotics_regimes():
    res = cli("--m", "0.5", "asymptotics", "--t", "10", "--y-grid", "10,14,25", "--delta", "0.1")
    assert res.returncode == 0, res.stderr
    cols, rows = table(res.stdout)
    k = cols.index("regime")
    assert [r[k] for r in rows] == ["uncovered", "bulk", "tail"]
    a = cols.index("approximation")
    assert rows[0][a] == "" and float(rows[1][a]) > 0


def test_stationary_json():
    res = cli("--m", "0.5", "stationary", "--y-grid", "0,1", "--format", "json")
    doc = json.loads(res.stdout)
    assert doc["rows"][0][1] == pytest.approx(0.5 * sum((-1) ** k * 0.5 ** (k * k / 2) / q_pochhammer(0.5, 0.5, k) for k in range(40)) / q_pochhammer(0.5, 0.5), rel=1e-12)


def test_simulate_writes_files(tmp_path):
    out = tmp_path / "sim.csv"
    res = cli("--m", "0.5", "simulate", "--t", "2", "--paths", "2000", "--seed", "7", "--bins", "10", "--out", str(out), "--emit-gnuplot")
    assert res.returncode == 0, res.stderr
    text = out.read_text()
    assert "# seed 7" in text
    cols, rows = table(text)
    assert cols == ["bin_left", "bin_right", "mass", "stderr"] and len(rows) == 10
    assert (tmp_path / "sim.gp").exists()
    again = tmp_path / "again.csv"
    cli("--m", "0.5", "simulate", "--t", "2", "--paths", "2000", "--seed", "7", "--bins", "10", "--out", str(again))
    # the header echoes the differing flag; the table itself is identical
    assert table(again.read_text()) == table(text)


def test_simulate_json(tmp_path):
    out = tmp_path / "sim.json"
    res = cli("--m", "0.5", "simulate", "--t", "1", "--paths", "500", "--seed", "1", "--format", "json", "--out", str(out))
    assert res.returncode == 0, res.stderr
    doc = json.loads(out.read_text())
    assert doc["stats"]["n_paths"] == 500


@pytest.mark.parametrize(
    "args",
    [
        ("--m", "0.5", "--c", "0.5", "density", "--t", "1", "--y-grid", "0"),
        ("density", "--t", "1", "--y-grid", "0"),
        ("--m", "1.5", "density", "--t", "1", "--y-grid", "0"),
        ("--m", "0.5", "density", "--t", "1", "--y-grid", "5:1:0"),
        ("--kernel", "symmetric", "--m", "0.5", "density", "--t", "1", "--y-grid", "0"),
        ("--m", "0.5", "asymptotics", "--t", "1", "--y-grid", "1", "--delta", "-1"),
    ],
)
def test_config_errors_exit_two(args):
    res = cli(*args)
    assert res.returncode == 2
    err = json.loads(res.stderr.strip().splitlines()[-1])
    assert err["error"] == "config" and err["message"]


def test_validate_subset_passes():
    res = cli("validate", "--only", "1")
    assert res.returncode == 0, res.stderr
    doc = json.loads(res.stdout)
    assert doc["passed"] and [c["number"] for c in doc["checks"]] == [1]
