"""CLI contract: schemas, determinism, exit codes, figure-scale examples."""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

import ginprod.cli as cli
import ginprod.engine
from ginprod.cli import main
from ginprod.errors import PrecisionError


def _read(path):
    with open(path) as fh:
        return fh.read()


def _rows(path):
    lines = _read(path).strip().split("\n")
    header = lines[0].split(",")
    return header, [line.split(",") for line in lines[1:]]


# ---------------------------------------------------------------------------
# schemas and determinism


def test_exponents_csv_schema_and_determinism(tmp_path):
    args = [
        "exponents", "--beta", "2", "--dim", "2", "--time", "4",
        "--reps", "3", "--seed", "5",
    ]
    a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    assert main(args + ["--out", a]) == 0
    assert main(args + ["--out", b]) == 0
    assert _read(a) == _read(b)
    assert _read(a + ".meta.json") == _read(b + ".meta.json")

    header, rows = _rows(a)
    assert header == ["rep", "n", "lambda", "gamma", "theta"]
    assert len(rows) == 3 * 2
    assert [r[0] for r in rows] == ["0", "0", "1", "1", "2", "2"]
    assert [r[1] for r in rows] == ["1", "2"] * 3

    meta = json.loads(_read(a + ".meta.json"))
    assert meta["config"]["subcommand"] == "exponents"
    assert meta["config"]["seed"] == 5
    assert meta["config"]["nu"] == 0
    assert isinstance(meta["precision_bits"], int)
    assert meta["retried_reps"] == []
    th = meta["theory"]
    assert len(th["mu"]) == len(th["sigma"]) == len(th["ring_radii"]) == 2
    assert th["ring_radii"] == [math.exp(m) for m in th["mu"]]


def test_exponents_n1_lambda_equals_gamma(tmp_path):
    # scalar chain: lambda and gamma are the same sum log|x_i| / t, one
    # accumulated in float64 QR, one through the extended-precision root
    # pipeline; they agree to final rounding (not bit-identical)
    out = str(tmp_path / "n1.csv")
    assert main(
        ["exponents", "--dim", "1", "--time", "3", "--reps", "4", "--out", out]
    ) == 0
    _, rows = _rows(out)
    for r in rows:
        lam, gam = float(r[2]), float(r[3])
        # rounding scale set by the O(1) log-factor addends, not the
        # (possibly cancelled) sum
        assert abs(lam - gam) <= 1e-15 * max(1.0, abs(gam))


def test_scatter_schema(tmp_path):
    out = str(tmp_path / "s.csv")
    assert main(
        ["scatter", "--dim", "2", "--time", "3", "--reps", "2", "--out", out]
    ) == 0
    header, rows = _rows(out)
    assert header == ["rep", "n", "modulus_rescaled", "theta"]
    assert len(rows) == 4
    for r in rows:
        assert float(r[2]) > 0
        assert 0.0 <= float(r[3]) < 2 * math.pi


def test_reps_zero_header_only(tmp_path):
    for sub in ("scatter", "exponents"):
        out = str(tmp_path / f"{sub}0.csv")
        assert main(
            [sub, "--dim", "2", "--time", "2", "--reps", "0", "--out", out]
        ) == 0
        header, rows = _rows(out)
        assert rows == []
        meta = json.loads(_read(out + ".meta.json"))
        assert "theory" in meta and "config" in meta


def test_json_format_embeds_meta(tmp_path):
    out = str(tmp_path / "e.json")
    assert main(
        [
            "exponents", "--dim", "2", "--time", "3", "--reps", "2",
            "--seed", "1", "--format", "json", "--out", out,
        ]
    ) == 0
    doc = json.loads(_read(out))
    assert doc["columns"] == ["rep", "n", "lambda", "gamma", "theta"]
    assert len(doc["rows"]) == 4
    assert set(doc["rows"][0]) == set(doc["columns"])
    assert doc["config"]["format"] == "json"
    assert "theory" in doc and "precision_bits" in doc
    # no sidecar in json mode
    assert not (tmp_path / "e.json.meta.json").exists()


def test_rectangular_exponents_empty_eigen_cells(tmp_path):
    out = str(tmp_path / "r.csv")
    assert main(
        [
            "exponents", "--dim", "2", "--nu", "0,1,2", "--time", "3",
            "--reps", "1", "--out", out,
        ]
    ) == 0
    _, rows = _rows(out)
    for r in rows:
        assert r[2] == "" and r[4] == ""  # lambda, theta empty
        assert r[3] != ""


def test_convergence_schema_and_band(tmp_path):
    out = str(tmp_path / "c.csv")
    args = [
        "convergence", "--beta", "2", "--dim", "2", "--time", "4",
        "--seed", "3", "--out", out,
    ]
    assert main(args) == 0
    header, rows = _rows(out)
    assert header == ["step", "n", "lambda", "gamma"]
    assert len(rows) == 4 * 2
    assert [r[0] for r in rows[:2]] == ["1", "1"]
    meta = json.loads(_read(out + ".meta.json"))
    band = meta["band"]
    assert [b["step"] for b in band] == [1, 2, 3, 4]
    assert all(len(b["mu"]) == 2 and len(b["sigma"]) == 2 for b in band)

    again = str(tmp_path / "c2.csv")
    assert main(args[:-1] + [again]) == 0
    assert _read(out) == _read(again)


def test_convergence_t1_single_row_per_n(tmp_path):
    out = str(tmp_path / "c1.csv")
    assert main(["convergence", "--dim", "3", "--time", "1", "--out", out]) == 0
    _, rows = _rows(out)
    assert len(rows) == 3


def test_stdout_default(capsys):
    assert main(["exponents", "--dim", "1", "--time", "2", "--reps", "1"]) == 0
    text = capsys.readouterr().out
    assert text.startswith("rep,n,lambda,gamma,theta\n")


# ---------------------------------------------------------------------------
# exit codes


def test_usage_errors():
    assert main(["scatter", "--nu", "1", "--dim", "2", "--time", "2"]) == 1
    assert main(["exponents", "--nu", "0,1", "--time", "3"]) == 1
    assert main(["exponents", "--beta", "3"]) == 1
    assert main(["nonsense"]) == 1
    assert main(["exponents", "--dim", "0"]) == 1
    assert main(["exponents", "--nu", "3,2", "--time", "2", "--dim", "2"]) == 1
    assert main(["exponents", "--reps", "-1"]) == 1


def test_help_exits_zero():
    assert main(["--help"]) == 0


def test_verify_failure_exit_code(monkeypatch, capsys):
    monkeypatch.setattr(
        cli, "_verify_checks", lambda config: [
            {"name": "forced", "passed": False, "detail": ""}
        ]
    )
    assert main(["verify"]) == 2
    doc = json.loads(capsys.readouterr().out)
    assert doc["passed"] is False


def test_numerical_failure_exit_code(monkeypatch, capsys):
    def boom(*a, **kw):
        raise PrecisionError("roots did not settle")

    monkeypatch.setattr(ginprod.engine, "run_reps", boom)
    monkeypatch.setattr(cli.engine, "run_reps", boom)
    assert main(["exponents", "--dim", "2", "--time", "2"]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_workers_env(monkeypatch, tmp_path):
    ref = str(tmp_path / "w1.csv")
    par = str(tmp_path / "w2.csv")
    args = ["exponents", "--dim", "2", "--time", "3", "--reps", "4", "--seed", "2"]
    assert main(args + ["--out", ref]) == 0
    monkeypatch.setenv("GINPROD_WORKERS", "2")
    assert cli._workers() == 2
    assert main(args + ["--out", par]) == 0
    assert _read(ref) == _read(par)


def test_console_script_runs():
    res = subprocess.run(
        ["ginprod", "exponents", "--dim", "1", "--time", "2", "--seed", "9"],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0
    assert res.stdout.startswith("rep,n,lambda,gamma,theta")
    helped = subprocess.run(["ginprod", "--help"], capture_output=True, text=True)
    assert helped.returncode == 0


# ---------------------------------------------------------------------------
# verification suite and figure-scale examples


def test_verify_all_checks_pass(capsys):
    assert main(["verify", "--seed", "1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["passed"] is True
    assert len(doc["checks"]) >= 15
    assert all(c["passed"] for c in doc["checks"])
    names = " ".join(c["name"] for c in doc["checks"])
    for token in ("meijer-moment", "meijer-exp", "marginal-mass", "permanent"):
        assert token in names


def test_scatter_rings_track_theory_radii(tmp_path):
    # three rings at e^{mu_n}, sample means within 1%
    out = str(tmp_path / "rings.csv")
    assert main(
        [
            "scatter", "--beta", "2", "--dim", "3", "--time", "200",
            "--reps", "200", "--seed", "0", "--out", out,
        ]
    ) == 0
    _, rows = _rows(out)
    meta = json.loads(_read(out + ".meta.json"))
    radii = meta["theory"]["ring_radii"]
    by_n = {n: [] for n in (1, 2, 3)}
    for r in rows:
        by_n[int(r[1])].append(float(r[2]))
    for n, want in zip((1, 2, 3), radii):
        got = float(np.mean(by_n[n]))
        assert abs(got - want) < 0.01 * want


def test_scatter_beta1_real_collapse(tmp_path):
    out = str(tmp_path / "real.csv")
    assert main(
        [
            "scatter", "--beta", "1", "--dim", "3", "--time", "200",
            "--reps", "200", "--seed", "0", "--out", out,
        ]
    ) == 0
    _, rows = _rows(out)
    th = np.array([float(r[3]) for r in rows])
    on_axis = np.abs(np.sin(th)) < 1e-6
    assert np.mean(on_axis) >= 0.999


def test_convergence_long_real_trace_contained(tmp_path):
    # single realization of a long real 5x5 chain: final exponents all
    # inside mu_n +/- 4 sigma_n
    out = str(tmp_path / "fig3.json")
    assert main(
        [
            "convergence", "--beta", "1", "--dim", "5", "--time", "1000",
            "--seed", "3", "--format", "json", "--out", out,
        ]
    ) == 0
    doc = json.loads(_read(out))
    mu = doc["theory"]["mu"]
    sig = doc["theory"]["sigma"]
    final = [r for r in doc["rows"] if r["step"] == 1000]
    assert len(final) == 5
    for row in final:
        m, s = mu[row["n"] - 1], sig[row["n"] - 1]
        assert abs(row["lambda"] - m) < 4 * s
        assert abs(row["gamma"] - m) < 4 * s
