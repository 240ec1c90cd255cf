import csv
import io
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from ueks import cli
from ueks.distributions import Exponential, WeibullAlt, sample


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def write(path, values):
    path.write_text("\n".join(repr(float(v)) for v in values) + "\n")
    return path


@pytest.fixture
def expdata(tmp_path):
    return write(tmp_path / "x.txt", sample(Exponential(1.0), 50, 5).values)


def test_test_report(capsys, expdata, tmp_path):
    code, out, _ = run(capsys, "test", expdata, "--test", "desu", "--reps", 2000,
                       "--cache-dir", tmp_path / "c")
    assert code == 0
    rep = json.loads(out)
    assert set(rep) == {"test", "side", "n", "statistic", "argmax_t", "p_value",
                        "critical_values", "reps", "seed"}
    assert set(rep["critical_values"]) == {"0.1", "0.05", "0.01"}
    assert rep["n"] == 50 and 0 < rep["p_value"] <= 1
    sides = {}
    for side in ("plus", "minus", "two-sided"):
        _, out, _ = run(capsys, "test", expdata, "--test", "desu", "--side", side,
                        "--reps", 2000, "--cache-dir", tmp_path / "c")
        sides[side] = json.loads(out)["statistic"]
    assert sides["two-sided"] == max(sides["plus"], sides["minus"])
    assert len(list((tmp_path / "c").iterdir())) == 1


def test_test_formats(capsys, expdata):
    _, out, _ = run(capsys, "test", expdata, "--test", "bh", "--reps", 500, "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 1 and "crit_0.05" in rows[0]
    # reps * 0.01 < 10: that level is reported as missing, not guessed
    assert rows[0]["crit_0.01"] == "nan"
    code, out, _ = run(capsys, "test", expdata, "--test", "bh", "--reps", 500, "--format", "pretty")
    assert code == 0 and "statistic" in out


def test_csv_column_input(capsys, tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("id,x\n1,0.5\n2,1.5\n3,0.25\n")
    code, out, _ = run(capsys, "test", p, "--test", "desu", "--column", "x", "--reps", 200)
    assert code == 0 and json.loads(out)["n"] == 3


def test_exit_codes(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("1.0\n2.0\nabc\n")
    code, _, err = run(capsys, "test", bad, "--test", "desu")
    assert code == 2 and "line 3" in err
    tied = write(tmp_path / "tied.txt", [1.0, 2.0, 2.0, 3.0])
    code, _, err = run(capsys, "test", tied, "--test", "desu", "--reps", 200)
    assert code == 3 and "2" in err
    code, _, _ = run(capsys, "test", tied, "--test", "desu", "--reps", 200, "--jitter")
    assert code == 0
    code, _, _ = run(capsys, "f0", "--a", "1.5")
    assert code == 2
    code, _, _ = run(capsys, "critvals", "--test", "desu", "--n", 20, "--reps", 50)
    assert code == 2


def test_critvals(capsys):
    args = ("critvals", "--test", "bh", "--n", 100, "--reps", 10000, "--seed", 1)
    code, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    assert code == 0 and a == b
    rep = json.loads(a)
    assert set(rep["criticals"]) == {"0.1", "0.05", "0.01"}
    vals = [rep["criticals"][k] for k in ("0.1", "0.05", "0.01")]
    assert vals == sorted(vals)
    _, out, _ = run(capsys, "critvals", "--test", "desu", "--n", 30, "--reps", 1000,
                    "--alpha", 0.2, "--alpha", 0.05, "--format", "csv")
    assert out.splitlines()[0] == "alpha,critical" and len(out.splitlines()) == 3


def test_ldrate(capsys):
    code, out, _ = run(capsys, "ldrate", "--test", "desu", "--a", 0.2, "--n-grid", "20,40",
                       "--reps", 1000, "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["n"] for r in rows] == ["20", "40"]
    assert set(rows[0]) == {"n", "exceedances", "p_hat", "rate_hat", "rate_theory"}
    assert float(rows[0]["rate_theory"]) == pytest.approx(0.08)


def test_varfun_polya(capsys, tmp_path):
    summ = tmp_path / "s.json"
    code, out, _ = run(capsys, "varfun", "--test", "polya", "--lo", -3, "--hi", 3,
                       "--points", 601, "--format", "csv", "--summary", summ)
    assert code == 0
    data = np.loadtxt(io.StringIO(out), delimiter=",", skiprows=1)
    assert data.shape == (601, 2)
    i = np.argmax(data[:, 1])
    assert abs(data[i, 0]) <= 0.01 + 1e-12
    assert data[i, 1] == pytest.approx(1 / 48, abs=1e-6)
    s = json.loads(summ.read_text())
    assert s["phi0_sq"] == pytest.approx(1 / 48, abs=1e-6)
    assert s["leading_coeff"] == pytest.approx(6.0, abs=1e-5)


def test_efficiency_command(capsys):
    code, out, _ = run(capsys, "efficiency", "--test", "desu", "--alt", "weibull",
                       "--format", "json")
    assert code == 0
    (row,) = json.loads(out)["rows"]
    assert row["efficiency"] == pytest.approx(0.1581, abs=0.003)


def test_f0_command(capsys):
    code, out, _ = run(capsys, "f0", "--a", 0.01, 0.999)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert 0.99 <= float(rows[0]["ratio_to_2a2"]) <= 1.01
    assert np.isfinite(float(rows[1]["f0"]))
    _, out, _ = run(capsys, "f0", "--grid", 99)
    f0 = np.loadtxt(io.StringIO(out), delimiter=",", skiprows=1)[:, 1]
    assert f0.shape == (99,) and np.all(np.diff(f0) > 0)


def test_null_calibration_and_power(capsys, tmp_path):
    cache = tmp_path / "cache"
    pv = []
    for seed in range(200):
        f = write(tmp_path / "n.txt", sample(Exponential(1.0), 200, 1000 + seed).values)
        _, out, _ = run(capsys, "test", f, "--test", "desu", "--reps", 10000, "--cache-dir", cache)
        pv.append(json.loads(out)["p_value"])
    assert 0.03 <= np.mean(np.array(pv) <= 0.05) <= 0.08
    pv = []
    for seed in range(100):
        f = write(tmp_path / "w.txt", sample(WeibullAlt(0.8), 200, 5000 + seed).values)
        _, out, _ = run(capsys, "test", f, "--test", "desu", "--reps", 10000, "--cache-dir", cache)
        pv.append(json.loads(out)["p_value"])
    assert np.mean(np.array(pv) <= 0.01) >= 0.9


@pytest.mark.parametrize("argv", [
    ["critvals", "--test", "angus", "--n", "40", "--reps", "5000", "--seed", "3"],
    ["ldrate", "--test", "bh", "--a", "0.3", "--n-grid", "10,20", "--reps", "5000", "--seed", "3"],
])
def test_byte_identical_across_thread_counts(argv):
    outs = []
    for threads in ("1", "2", "1"):
        env = dict(os.environ, UEKS_THREADS=threads)
        r = subprocess.run([sys.executable, "-m", "ueks.cli", *argv], env=env,
                           capture_output=True, check=True)
        outs.append(r.stdout)
    assert outs[0] == outs[1] == outs[2]
