import csv
import io
import json
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from coxjost.cli import InputError, main, parse_grid

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def run(args, capsys):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_analyze_fig1(capsys):
    code, out, err = run(["analyze", "--model", FIXTURES / "fig1.json"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["tally"]["n_b"] == 2 and rep["count_bound_states"] == 2
    bound = sorted(p["energy"][0] for p in rep["points"] if p["class"] == "bound")
    np.testing.assert_allclose(bound, [-51.8611, -8.8852], atol=1e-3)
    assert "bound 2" in err


def test_analyze_to_file(tmp_path, capsys):
    dest = tmp_path / "fig2.json"
    code, out, _ = run(["analyze", "--model", FIXTURES / "fig2.json", "--out", dest], capsys)
    assert code == 0 and "virtual 12" in out
    assert json.loads(dest.read_text())["tally"]["n_v"] == 12


def test_duplicate_thresholds_exit_1(capsys):
    code, _, err = run(["analyze", "--model", FIXTURES / "duplicate_thresholds.json"], capsys)
    assert code == 1
    assert "thresholds not distinct" in json.loads(err)["violations"]


def test_missing_model_exit_1(tmp_path, capsys):
    code, _, err = run(["analyze", "--model", tmp_path / "none.json"], capsys)
    assert code == 1 and json.loads(err)["error"] == "invalid_input"


def test_bad_tolerance_exit_1(capsys):
    code, _, _ = run(["analyze", "--model", FIXTURES / "fig1.json", "--tol", "polish=-1"], capsys)
    assert code == 1


def test_invert2_two_bound(capsys):
    code, out, _ = run(["invert2", "--scenario", "two-bound", "--delta", 1, "--beta", 0.1,
                        "--lam", "0.1,1.5", "--branch", "upper"], capsys)
    assert code == 0
    rep = json.loads(out)
    np.testing.assert_allclose(rep["alpha"], [-0.112649, -1.79557], atol=1e-5)
    assert rep["regular"] and rep["spectrum"]["tally"]["n_b"] == 2


def test_invert2_from_file(capsys):
    code, out, _ = run(["invert2", "--input", FIXTURES / "resonance.json"], capsys)
    assert code == 0
    rep = json.loads(out)
    np.testing.assert_allclose(rep["alpha"], [0.76938, -0.766853], atol=1e-5)
    assert rep["spectrum"]["tally"]["n_r"] == 1


def test_invert2_unrealizable_exit_2(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"delta": 1, "beta": 0.01,
                                "resonance": {"er": 0.4, "ei": 0.01}, "branch": "upper"}))
    code, _, err = run(["invert2", "--input", spec], capsys)
    assert code == 2 and json.loads(err)["error"] == "NonRealAlpha"


def test_invert2_restriction_exit_1(capsys):
    code, _, _ = run(["invert2", "--scenario", "two-bound", "--delta", 1, "--beta", 0.1,
                      "--lam", "0.1,1.5", "--kappa1", 1.0], capsys)
    assert code == 1


def test_curves_csv(capsys):
    code, out, _ = run(["curves", "--model", FIXTURES / "fig1.json", "--sheet", "+++",
                        "--grid", "0:10:101"], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert len(rows) == 102


def test_curves_bad_sheet(capsys):
    code, _, _ = run(["curves", "--model", FIXTURES / "fig1.json", "--sheet=-++"], capsys)
    assert code == 1


def test_perturb_table(capsys):
    code, out, _ = run(["perturb", "--model", FIXTURES / "fig2.json"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 12


def test_potential_csv(capsys):
    code, out, _ = run(["potential", "--model", FIXTURES / "fig2.json", "--grid", "0:5:11"], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["r", "V_11", "V_12", "V_13", "V_22", "V_23", "V_33"]
    assert len(rows) == 12


def test_scatter_csv(tmp_path, capsys):
    model = tmp_path / "m.json"
    model.write_text(json.dumps({"n": 2, "thresholds": [0, 1], "alpha": [0.76938, -0.766853],
                                 "beta": [[1, 2, 0.1]], "factorization_energy": -0.25}))
    code, out, err = run(["scatter", "--model", model, "--grid", "0.5:1.5:3"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["open_count"] for r in rows] == ["1", "2"]
    assert "threshold" in err


def test_bad_grid():
    with pytest.raises(InputError):
        parse_grid("1:0:5")
    with pytest.raises(InputError):
        parse_grid("0:1")


def test_number_format(capsys):
    _, out, _ = run(["potential", "--model", FIXTURES / "fig1.json", "--grid", "0:30:4"], capsys)
    assert "E" not in out.split("\n", 1)[1]
    assert "e-" in out


@pytest.mark.parametrize("args", [
    ["analyze", "--model", FIXTURES / "fig1.json"],
    ["invert2", "--input", FIXTURES / "resonance.json"],
    ["scatter", "--model", FIXTURES / "fig2.json", "--grid", "0.1:40:50"],
])
def test_byte_identical_reruns(args, tmp_path, capsys):
    texts = []
    for i in range(2):
        dest = tmp_path / f"out{i}"
        assert main([str(a) for a in args] + ["--out", str(dest)]) == 0
        texts.append(dest.read_bytes())
    capsys.readouterr()
    assert texts[0] == texts[1]


def test_console_entry_point():
    exe = shutil.which("coxjost")
    cmd = [exe] if exe else [sys.executable, "-m", "coxjost"]
    proc = subprocess.run(cmd + ["analyze", "--model", str(FIXTURES / "fig2.json")],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["tally"]["expected_total"] == 12


def test_usage_error_exit_1(capsys):
    code, _, err = run(["analyze", "--bogus"], capsys)
    assert code == 1 and json.loads(err)["error"] == "invalid_input"
