import csv
import io
import json
import subprocess
import sys

import pytest

from ginprod.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def error_code(err):
    return json.loads(err.strip().splitlines()[-1])["error"]["code"]


def test_poly_n0(capsys):
    code, out, _ = run(capsys, "poly", "--M", "1", "--nu", "0", "--n", "0", "--format", "json",
                       "--grid", "1,1,1")
    assert code == 0
    assert json.loads(out)["coefficients"] == [1]


def test_poly_laguerre(capsys):
    code, out, _ = run(capsys, "poly", "--M", "1", "--nu", "0", "--n", "2", "--grid", "1,1,1")
    assert code == 0
    coeffs = [r["value"] for r in rows(out) if r["repr"] == "coeff"]
    assert coeffs == ["2", "-4", "1"]


def test_bad_nu(capsys):
    code, _, err = run(capsys, "poly", "--M", "1", "--nu", "-2", "--n", "2")
    assert code == 2
    assert error_code(err) == "param.nu.range"


def test_kernel_n1(capsys):
    code, out, _ = run(capsys, "kernel", "--M", "1", "--nu", "0", "--n", "1", "--grid", "1,1,1")
    assert code == 0
    (row,) = rows(out)
    assert abs(float(row["value"]) - 0.3678794) < 1e-7


def test_grid_count_zero(capsys):
    code, _, err = run(capsys, "kernel", "--M", "1", "--nu", "0", "--n", "1", "--grid", "0.1,1,0,log")
    assert code == 2
    assert error_code(err) == "config.grid.count"


def test_kernel_all_representations(capsys):
    code, out, _ = run(capsys, "kernel", "--M", "2", "--nu", "0,1", "--n", "3", "--grid", "0.5,2,2",
                       "--repr", "all", "--diagonal")
    assert code == 0
    table = rows(out)
    assert {r["repr"] for r in table} == {"sum", "u-integral", "contour"}
    by_point = {}
    for r in table:
        by_point.setdefault((r["x"], r["y"]), []).append(float(r["value"]))
    for vals in by_point.values():
        assert max(vals) - min(vals) < 1e-6


def test_hard_edge_bessel_column(capsys):
    code, out, _ = run(capsys, "hard-edge", "--M", "1", "--nu", "0", "--grid", "0.5,2,3", "--diagonal")
    assert code == 0
    for r in rows(out):
        assert abs(float(r["value"]) - float(r["bessel"])) <= 1e-10


def test_hard_edge_cauchy(capsys):
    code, out, _ = run(capsys, "hard-edge", "--M", "2", "--nu", "1,1", "--grid", "1,2,2",
                       "--cauchy-check")
    assert code == 0
    assert all(float(r["cauchy_rel_dev"]) <= 1e-7 for r in rows(out))
    code, _, err = run(capsys, "hard-edge", "--M", "3", "--nu", "0,0,0", "--grid", "1,2,2",
                       "--cauchy-check")
    assert code == 2
    assert error_code(err) == "config.cauchy.M"


def test_sample_deterministic(capsys, monkeypatch):
    argv = ("sample", "--dims", "2,3,3", "--seed", "4", "--trials", "3000", "--format", "json")
    monkeypatch.setenv("GINPROD_THREADS", "1")
    _, one, _ = run(capsys, *argv)
    monkeypatch.setenv("GINPROD_THREADS", "3")
    code, two, _ = run(capsys, *argv)
    assert code == 0
    assert one == two
    assert json.loads(one)["spec"]["nu"] == [1, 1]


def test_sample_errors(capsys):
    code, _, err = run(capsys, "sample", "--dims", "3,2", "--seed", "1")
    assert code == 2 and error_code(err) == "spec.n0.min"
    code, _, err = run(capsys, "sample", "--M", "1", "--nu", "0.5", "--n", "2", "--seed", "1")
    assert code == 2 and error_code(err) == "sampler.integer-nu"


def test_recurrence(capsys):
    code, out, _ = run(capsys, "recurrence", "--M", "1", "--nu", "2", "--n", "4", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload["residual_zero"]
    a0 = {r["n"]: r["value"] for r in payload["a"] if r["k"] == 0}
    assert a0 == {n: 2 * n + 3 for n in range(5)}


def test_verify_quick_and_mutation(capsys):
    code, out, _ = run(capsys, "verify", "--quick", "--format", "json")
    assert code == 0 and json.loads(out)["passed"]
    code, out, _ = run(capsys, "verify", "--quick", "--format", "json", "--perturb-a0", "1")
    assert code == 1
    failed = [c["name"] for c in json.loads(out)["checks"] if c["status"] == "fail"]
    assert failed and all(name.startswith("recurrence") for name in failed)


def test_config_roundtrip(capsys, tmp_path):
    code, out, _ = run(capsys, "kernel", "--M", "2", "--nu", "0,1/2", "--n", "3", "--grid",
                       "0.5,2,2,log", "--dump-config")
    assert code == 0
    path = tmp_path / "job.json"
    path.write_text(out)
    code, again, _ = run(capsys, "kernel", "--config", str(path), "--dump-config")
    assert code == 0 and json.loads(again) == json.loads(out)
    code, _, _ = run(capsys, "kernel", "--config", str(path), "--n", "0", "--dump-config")
    assert code == 2


def test_out_file(capsys, tmp_path):
    target = tmp_path / "k.csv"
    code, out, _ = run(capsys, "kernel", "--M", "1", "--nu", "0", "--n", "2", "--grid", "1,2,2",
                       "--out", str(target))
    assert code == 0 and out == ""
    assert len(rows(target.read_text())) == 4


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ginprod.cli", "poly", "--M", "1", "--nu", "0",
                           "--n", "1", "--grid", "1,1,1", "--format", "json"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["coefficients"] == [-1, 1]


def test_unknown_command(capsys):
    code, _, _ = run(capsys, "frobnicate")
    assert code == 2
