import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from zeroenergy.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def test_eigenpair_closed_form_rows(capsys):
    rep = run_json(capsys, "eigenpair", "--d", "1", "--alpha", "1", "--l", "0", "--kappa", "1",
                   "--grid", "log:1e-1:1e4:50")
    rows = rep["rows"]
    assert len(rows) == 50
    r = np.array([row["r"] for row in rows])
    V = np.array([row["V"] for row in rows])
    np.testing.assert_allclose(V, (r**2 - 1) / (1 + r**2), rtol=1e-10, atol=1e-13)
    assert rep["metadata"]["version"]


def test_classify_out_of_range_exits_2(capsys):
    code, _, err = run(capsys, "eigenpair", "--d", "1", "--alpha", "1", "--l", "0", "--kappa", "1.5",
                       "--classify")
    assert code == 2
    assert "kappa" in err


def test_antisymmetric_on_nodal_plane_is_zero(capsys):
    rep = run_json(capsys, "eigenpair", "--d", "2", "--alpha", "1", "--l", "1", "--axis", "1",
                   "--kappa", "1.2", "--grid", "0.5,1,2,8", "--direction", "0,1")
    assert all(row["phi"] == 0.0 for row in rep["rows"])


def test_residual_end_to_end(capsys):
    rep = run_json(capsys, "residual", "--d", "1", "--alpha", "1", "--kappa", "0.5",
                   "--grid", "0.5,1,3")
    assert rep["max_rel"] < 1e-8
    assert len(rep["rows"]) == 3


def test_classify_and_predict(capsys):
    rep = run_json(capsys, "classify", "--alpha", "1", "--potential", "power", "--beta", "0.5")
    assert rep["scenario"] == 1
    rep = run_json(capsys, "predict", "--alpha", "1", "--potential", "power", "--beta", "0.5")
    assert rep["prediction"]["lower"]["a"] == pytest.approx(1.5)


def test_csv_format(capsys):
    code, out, _ = run(capsys, "--format", "csv", "eigenpair", "--kappa", "0.5", "--grid", "1,2,4")
    assert code == 0
    body = [line for line in out.splitlines() if not line.startswith("#")]
    rows = list(csv.DictReader(io.StringIO("\n".join(body))))
    assert len(rows) == 3 and float(rows[0]["r"]) == 1.0


def test_toml_config_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text('[eigenpair]\nd = 1\nalpha = 1.0\nkappa = 0.5\ngrid = "1,2"\n')
    rep = run_json(capsys, "--config", str(cfg), "eigenpair", "--kappa", "0.75")
    assert rep["spec"]["kappa"] == 0.75
    assert len(rep["rows"]) == 2


def test_unknown_config_key_exits_2(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("[eigenpair]\nkapa = 0.5\n")
    code, _, err = run(capsys, "--config", str(cfg), "eigenpair")
    assert code == 2 and "kapa" in err


def test_out_file(tmp_path, capsys):
    out = tmp_path / "rep.json"
    code, _, _ = run(capsys, "--out", str(out), "eigenpair", "--kappa", "0.5", "--grid", "1")
    assert code == 0
    assert json.loads(out.read_text())["rows"][0]["r"] == 1.0


def test_verify_iterations(capsys):
    rep = run_json(capsys, "verify", "--suite", "iterations")
    assert rep["all_pass"] and [c["id"] for c in rep["criteria"]] == ["C8"]


def test_verify_unsupported_family_exits_2(capsys):
    code, _, _ = run(capsys, "verify", "--suite", "residual", "--family", "power")
    assert code == 2


def test_fit_from_csv(tmp_path, capsys):
    r = np.geomspace(1, 1e4, 30)
    path = tmp_path / "s.csv"
    np.savetxt(path, np.column_stack([r, 3 * r**-2.5]), delimiter=",", header="r,value", comments="")
    rep = run_json(capsys, "fit", "--input", str(path))
    assert rep["fit"]["rate"]["a"] == pytest.approx(2.5, abs=1e-10)


def test_fit_failure_exits_3(tmp_path, capsys):
    path = tmp_path / "s.csv"
    r = np.geomspace(1, 1e4, 30)
    np.savetxt(path, np.column_stack([r, -np.ones_like(r)]), delimiter=",", header="r,value",
               comments="")
    code, _, _ = run(capsys, "fit", "--input", str(path))
    assert code == 3


def test_simulate_exit_smoke(capsys):
    rep = run_json(capsys, "--seed", "3", "simulate", "exit", "--alpha", "1", "--d", "1",
                   "--paths", "2000", "--dt", "1e-2")
    est = rep["estimate"]
    assert est["mean"] == pytest.approx(1.0, rel=0.1)


def test_simulate_reproducible(capsys):
    args = ("--seed", "11", "simulate", "exit", "--paths", "500", "--dt", "1e-2")
    a = run_json(capsys, *args)
    b = run_json(capsys, *args)
    assert a["estimate"] == b["estimate"]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "zeroenergy", "--version"], capture_output=True,
                         text=True)
    assert res.returncode == 0 and "0.1.0" in res.stdout
