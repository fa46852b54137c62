import csv
import json
import math

import numpy as np
import pytest
from scipy.stats import norm

from funcineq.cli import CSV_COLUMNS, USAGE, VIOLATION, OK, run
from funcineq.space import grid_coordinates


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def files(tmp_path):
    two = write_json(tmp_path / "twopoint.json",
                     {"points": ["a", "b"], "weights": [0.5, 0.5], "dist": [[0, 1], [1, 0]]})
    return {
        "dir": tmp_path,
        "two": two,
        "f_lip": write_json(tmp_path / "flip.json", {"values": [0.0, 1.0]}),
        "f_pos": write_json(tmp_path / "fpos.json", {"values": [1.0, 2.0], "positive": True}),
        "f_const": write_json(tmp_path / "fconst.json", {"values": [2.0, 2.0]}),
        "nu": write_json(tmp_path / "nu.json", {"weights": [0.8, 0.2]}),
    }


class TestExitCodes:
    def test_validate(self, files):
        assert run(["validate", "--space", files["two"]]) == OK

    def test_triangle_violation_is_usage_error(self, files, capsys):
        bad = write_json(files["dir"] / "bad.json",
                         {"weights": [1 / 3] * 3, "dist": [[0, 1, 5], [1, 0, 1], [5, 1, 0]]})
        assert run(["validate", "--space", bad]) == USAGE
        assert "triangle" in capsys.readouterr().err

    def test_missing_file(self, files):
        assert run(["validate", "--space", str(files["dir"] / "nope.json")]) == USAGE

    def test_unknown_subcommand_and_flag(self, files):
        assert run(["frobnicate"]) == USAGE
        assert run(["validate", "--space", files["two"], "--bogus"]) == USAGE

    def test_unsorted_grid(self, files):
        assert run(["rh-verify", "--space", files["two"], "--field", files["f_pos"],
                    "--p-grid", "1,0.5", "--constant-from", "value:2"]) == USAGE

    def test_window_error(self):
        assert run(["rh-constant", "--theorem", "poincare", "--lambda1", "0.25", "--L", "1",
                    "--p", "3"]) == USAGE


class TestCommands:
    def test_poincare_prints_three(self, capsys):
        assert run(["rh-constant", "--theorem", "poincare", "--lambda1", "0.25", "--L", "0.5",
                    "--p", "1"]) == OK
        assert float(capsys.readouterr().out) == pytest.approx(3.0, rel=1e-12)

    def test_herbst_json(self, capsys):
        assert run(["rh-constant", "--theorem", "herbst", "--lambda-ls", "1", "--L", "1",
                    "--p", "1", "--json"]) == OK
        rep = json.loads(capsys.readouterr().out)
        assert rep["schema"] == 1
        assert rep["value"] == pytest.approx(math.exp(0.5))

    def test_nontight_reports_both(self, capsys):
        assert run(["rh-constant", "--theorem", "expnt", "--M", "1", "--lambda-exp", "2",
                    "--L", "1", "--p", "0.5"]) == OK
        out = capsys.readouterr().out
        assert "uniform" in out and "conjugate" in out

    def test_legendre(self, files):
        out = files["dir"] / "leg.json"
        assert run(["legendre", "--profile", "quadratic:1", "--s", "0,1,2", "--out", str(out)]) == OK
        rep = json.loads(out.read_text())
        np.testing.assert_allclose([float(v) for v in rep["conjugate"]], [0.0, 0.5, 2.0])

    def test_transport(self, files):
        out = files["dir"] / "w.json"
        assert run(["transport", "--space", files["two"], "--nu", files["nu"], "--out", str(out)]) == OK
        assert json.loads(out.read_text())["W"] == pytest.approx(0.3)

    def test_ic_check_pass_and_fail(self, files):
        assert run(["ic-check", "--space", files["two"], "--phi", "identity",
                    "--Phi", "quadratic:4", "--field", files["f_lip"]]) == OK
        out = files["dir"] / "ic.json"
        assert run(["ic-check", "--space", files["two"], "--phi", "identity", "--Phi", "quadratic:400",
                    "--field", files["f_lip"], "--out", str(out)]) == VIOLATION
        assert "field" in json.loads(out.read_text())

    def test_te_check(self, files):
        assert run(["te-check", "--space", files["two"], "--phi", "identity",
                    "--Phi", "quadratic:4", "--count", "6"]) == OK

    def test_rh_verify_outputs(self, files):
        jl, cs = files["dir"] / "v.jsonl", files["dir"] / "v.csv"
        assert run(["rh-verify", "--space", files["two"], "--field", files["f_pos"],
                    "--p-grid", "0.5,1", "--constant-from", "main:quadratic:1",
                    "--out", str(jl), "--csv", str(cs)]) == OK
        recs = [json.loads(line) for line in jl.read_text().splitlines()]
        assert len(recs) == 2 and all(r["schema"] == 1 for r in recs)
        rows = list(csv.reader(cs.open()))
        assert rows[0] == list(CSV_COLUMNS)
        assert [r[-1] for r in rows[1:]] == ["pass", "pass"]

    def test_rh_verify_violation(self, files):
        assert run(["rh-verify", "--space", files["two"], "--field", files["f_pos"],
                    "--p-grid", "1", "--constant-from", "value:1.0"]) == VIOLATION


class TestConcentrationProfile:
    def test_constant_family(self, files, capsys):
        assert run(["concentration-profile", "--space", files["two"], "--field", files["f_const"],
                    "--t-grid", "0.5,1"]) == OK
        rows = list(csv.reader(capsys.readouterr().out.splitlines()))
        assert [float(r[1]) for r in rows[1:]] == [0.0, 0.0]

    def test_gaussian_tail_and_bound(self, tmp_path, capsys, gaussian_grid):
        fx = write_json(tmp_path / "x.json", {"values": grid_coordinates(gaussian_grid).tolist()})
        assert run(["concentration-profile", "--space", "line:gaussian:8:0.0025", "--field", fx,
                    "--t-grid", "0.5,1,2", "--Phi", "quadratic:1"]) == OK
        rows = list(csv.reader(capsys.readouterr().out.splitlines()))
        assert rows[0] == ["t", "tail", "bound"]
        t, tail, bound = (np.array([float(r[k]) for r in rows[1:]]) for k in range(3))
        assert tail[1] == pytest.approx(norm.sf(1.0), abs=1e-3)
        np.testing.assert_allclose(bound, np.exp(-t ** 2 / 2))
        assert np.all(tail <= bound)

    def test_normalizes_steep_fields(self, files, capsys):
        steep = write_json(files["dir"] / "steep.json", {"values": [0.0, 4.0]})
        assert run(["concentration-profile", "--space", files["two"], "--field", steep,
                    "--t-grid", "0.5"]) == OK
        rows = list(csv.reader(capsys.readouterr().out.splitlines()))
        assert float(rows[1][1]) == 0.5


class TestDeterminism:
    def test_reports_are_byte_identical(self, files):
        outs = []
        for k in range(2):
            out = files["dir"] / f"te{k}.json"
            run(["te-check", "--space", "random:8:3", "--phi", "quadratic:1", "--Phi", "identity",
                 "--nu-family", "dirichlet", "--count", "5", "--seed", "7", "--out", str(out)])
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_suite_report_is_byte_identical(self, files):
        outs = []
        for k in range(2):
            out = files["dir"] / f"suite{k}.json"
            assert run(["suite", "--preset", "exponential-line", "--out", str(out)]) == OK
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]
        assert json.loads(outs[0])["verdict"] == "pass"
