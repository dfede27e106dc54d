import csv
import io
import json

import pytest

from dp6a2 import cli


def run(capsys, *argv):
    rc = cli.main(list(argv))
    return rc, capsys.readouterr().out


def test_count_both(capsys):
    rc, out = run(capsys, "count", "--max-height", "1", "1000", "--method", "both")
    assert rc == 0
    rep = json.loads(out)
    rows = rep["results"]["rows"]
    assert rows[0] == {**rows[0], "B": "1", "N_direct": "7", "T": "0", "N_zero": "7", "equal": True}
    assert rows[1]["N_direct"] == rows[1]["N_torsor_total"] == "17295"
    assert rep["version"] and rep["passed"] is True


def test_count_csv(capsys, tmp_path):
    path = tmp_path / "sweep.csv"
    rc, _ = run(capsys, "count", "--max-height", "10", "100", "--format", "csv", "--out", str(path))
    assert rc == 0
    rows = list(csv.DictReader(io.StringIO(path.read_text())))
    assert list(rows[0]) == cli.CSV_COLUMNS
    assert [r["N_torsor_total"] for r in rows] == ["71", "1067"]


def test_count_torsor_large(capsys):
    rc, out = run(capsys, "count", "--max-height", "1000000", "--method", "torsor")
    row = json.loads(out)["results"]["rows"][0]
    assert rc == 0
    assert row["T"] == "24388196" and row["N_zero"] == "1241115"
    assert row["seconds_torsor"] > 0


def test_configuration_errors(capsys):
    assert cli.main(["count", "--max-height", "0"]) == cli.EXIT_CONFIG
    assert cli.main(["count", "--max-height", "4000000000", "--method", "direct"]) == cli.EXIT_CONFIG
    assert cli.main(["constant", "--primes-up-to", "100"]) == cli.EXIT_CONFIG
    with pytest.raises(SystemExit) as e:
        cli.main(["verify", "--suite", "nonsense"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        cli.main(["count", "--max-height", "10", "--threads", "0"])
    assert e.value.code == 2


@pytest.mark.parametrize("suite", ["identities", "bijection", "fp"])
def test_verify_passing_suites(capsys, suite):
    rc, out = run(capsys, "verify", "--suite", suite)
    rep = json.loads(out)
    assert rc == 0 and rep["passed"]
    assert all(c["passed"] for c in rep["results"]["checks"])


def test_verify_bounds_reports_failed_lemma(capsys):
    rc, out = run(capsys, "verify", "--suite", "bounds")
    checks = {c["name"]: c for c in json.loads(out)["results"]["checks"]}
    assert rc == cli.EXIT_FAIL
    assert not checks["F1(u, v) <= 2/sqrt(u) on a 100x100 grid"]["passed"]
    assert "counterexample" in checks["F1(u, v) <= 2/sqrt(u) on a 100x100 grid"]
    assert checks["F1(u, v) <= 2 sqrt(2)/sqrt(u) on a 100x100 grid"]["passed"]
    assert all(v["passed"] for k, v in checks.items() if not k.startswith("F1(u, v) <= 2/"))


def test_constant(capsys):
    rc, out = run(capsys, "constant", "--primes-up-to", "1000", "--quad-tol", "1e-6")
    res = json.loads(out)["results"]
    assert rc == 0
    assert res["alpha"] == "1/432"
    assert res["tau_p_2"] == "13/64"
    assert res["c"] == pytest.approx(res["tau_inf_3d"] * res["prod_tau_p"] / 432)


def test_fit_small_grid(capsys):
    rc, out = run(capsys, "fit", "--grid", "1000:100000:8")
    res = json.loads(out)["results"]
    assert rc == 0
    assert len(res["counts"]) == 8
    assert res["counts"]["1000"] == "17295"
    assert {"c_fit", "c_fit_stderr", "c_predicted", "monic_coefficients"} <= set(res)


def test_parse_grid():
    assert cli.parse_grid("10:1000:3") == [10, 100, 1000]
    assert cli.parse_grid("5, 1e3 ,7") == [5, 7, 1000]


def test_report_is_deterministic(capsys):
    _, a = run(capsys, "verify", "--suite", "fp")
    _, b = run(capsys, "verify", "--suite", "fp")
    strip = lambda s: {k: v for k, v in json.loads(s).items() if k != "timings"}  # noqa: E731
    assert strip(a) == strip(b)
