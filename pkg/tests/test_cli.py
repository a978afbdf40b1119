import json

import numpy as np
import pytest

from twosample_el import Method, TwoSampleData, chisq_quantile, contains, interval_1d
from twosample_el.cli import main
from twosample_el.eel import MappingSpec, expansion_factor
from twosample_el.simulate import chisq1_vs_normal


@pytest.fixture
def csv_2d(tmp_path):
    x_dist, y_dist = chisq1_vs_normal()
    rng = np.random.default_rng(20260810)
    X = x_dist.sample(20, rng)
    Y = y_dist.sample(20, rng)
    xp, yp = tmp_path / "x.csv", tmp_path / "y.csv"
    np.savetxt(xp, X, delimiter=",")
    np.savetxt(yp, Y, delimiter=",")
    return str(xp), str(yp), TwoSampleData(X, Y)


@pytest.fixture
def csv_1d(tmp_path):
    rng = np.random.default_rng(55)
    X = rng.normal(size=25)
    Y = rng.normal(1.0, 1.0, size=25)
    xp, yp = tmp_path / "x1.csv", tmp_path / "y1.csv"
    np.savetxt(xp, X, delimiter=",")
    np.savetxt(yp, Y, delimiter=",")
    return str(xp), str(yp), TwoSampleData(X, Y)


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr().out
    return code, out


class TestEval:
    def test_statistic_zero_at_mele(self, csv_2d, capsys):
        xp, yp, data = csv_2d
        theta = data.mele()
        code, out = run_cli(
            ["eval", "--x", xp, "--y", yp, "--method", "oel",
             f"--theta={theta[0]},{theta[1]}"],
            capsys,
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["statistic"] == 0.0
        assert payload["contained"] is True
        assert payload["method"] == "oel"
        assert set(payload) == {"statistic", "threshold", "contained", "method", "alpha", "eta", "seed"}

    def test_infinite_statistic_serialized(self, csv_1d, capsys):
        xp, yp, data = csv_1d
        far = float(data.Y.max() - data.X.min()) + 5.0
        code, out = run_cli(
            ["eval", "--x", xp, "--y", yp, "--method", "oel", "--theta", str(far)], capsys
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["statistic"] == "inf"
        assert payload["contained"] is False

    def test_dimension_mismatch_exits_2(self, csv_2d, csv_1d, capsys):
        xp2, _, _ = csv_2d
        _, yp1, _ = csv_1d
        code = main(["eval", "--x", xp2, "--y", yp1, "--theta", "0.0,0.0"])
        assert code == 2

    def test_theta_dimension_check(self, csv_2d, capsys):
        xp, yp, _ = csv_2d
        code = main(["eval", "--x", xp, "--y", yp, "--theta", "0.0"])
        assert code == 2

    def test_missing_theta_flag_exits_2(self, csv_2d):
        xp, yp, _ = csv_2d
        assert main(["eval", "--x", xp, "--y", yp]) == 2

    def test_agrees_with_library_contains(self, csv_2d, capsys):
        xp, yp, data = csv_2d
        rng = np.random.default_rng(77)
        theta_hat = data.mele()
        for _ in range(100):
            theta = theta_hat + rng.normal(scale=0.8, size=2)
            method = rng.choice(["oel", "eel1"])
            alpha = float(rng.choice([0.05, 0.1]))
            code, out = run_cli(
                ["eval", "--x", xp, "--y", yp, "--method", method,
                 "--alpha", str(alpha), f"--theta={theta[0]},{theta[1]}"],
                capsys,
            )
            assert code == 0
            payload = json.loads(out)
            lib = contains(data, theta, alpha, Method.oel() if method == "oel" else Method.eel1())
            assert payload["contained"] == lib


class TestRegion:
    def test_matches_library_interval(self, csv_1d, capsys):
        xp, yp, data = csv_1d
        code, out = run_cli(["region", "--x", xp, "--y", yp, "--method", "eel1"], capsys)
        assert code == 0
        payload = json.loads(out)
        lo, hi = interval_1d(data, 0.05, Method.eel1()).d1_interval
        assert payload["lo"] == pytest.approx(lo, abs=1e-12)
        assert payload["hi"] == pytest.approx(hi, abs=1e-12)

    def test_requires_1d(self, csv_2d):
        xp, yp, _ = csv_2d
        assert main(["region", "--x", xp, "--y", yp]) == 2

    def test_bel_with_bootstrap_eta(self, csv_1d, capsys):
        xp, yp, _ = csv_1d
        code, out = run_cli(
            ["region", "--x", xp, "--y", yp, "--method", "bel",
             "--bootstrap-b", "150", "--seed", "3"],
            capsys,
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["eta"] > 0
        assert payload["lo"] < payload["hi"]


class TestContour:
    def test_csv_similarity_end_to_end(self, csv_2d, capsys):
        xp, yp, data = csv_2d

        def radii(method):
            code, out = run_cli(
                ["contour", "--x", xp, "--y", yp, "--method", method,
                 "--angles", "16", "--format", "csv"],
                capsys,
            )
            assert code == 0
            lines = out.strip().split("\n")
            assert lines[0] == "phi,r,theta1,theta2"
            return np.array([float(line.split(",")[1]) for line in lines[1:]])

        r_eel = radii("eel1")
        r_oel = radii("oel")
        gam = expansion_factor(data.N, chisq_quantile(2, 0.95), MappingSpec.first_order())
        np.testing.assert_allclose(r_eel / r_oel, gam, rtol=1e-6)

    def test_requires_2d(self, csv_1d):
        xp, yp, _ = csv_1d
        assert main(["contour", "--x", xp, "--y", yp]) == 2

    def test_json_format(self, csv_2d, capsys):
        xp, yp, _ = csv_2d
        code, out = run_cli(
            ["contour", "--x", xp, "--y", yp, "--angles", "8"], capsys
        )
        assert code == 0
        payload = json.loads(out)
        assert len(payload["polyline"]) == 8
        assert payload["method"] == "eel1"


class TestCoverage:
    def test_runs_study_from_config(self, tmp_path, capsys):
        config = {
            "x_dist": [{"kind": "chisquare", "df": 1}, {"kind": "chisquare", "df": 1}],
            "y_dist": [{"kind": "stdnormal"}, {"kind": "stdnormal"}],
            "m_grid": [10],
            "n_grid": [10],
            "reps": 25,
            "alpha": 0.05,
            "methods": ["oel", "eel1"],
            "seed": 99,
        }
        path = tmp_path / "study.json"
        path.write_text(json.dumps(config), encoding="utf-8")
        code, out = run_cli(["coverage", "--config", str(path), "--format", "csv"], capsys)
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "m,n,method,coverage,mc_se,failures"
        assert len(lines) == 3

    def test_reps_override(self, tmp_path, capsys):
        config = {
            "x_dist": [{"kind": "stdnormal"}],
            "y_dist": [{"kind": "stdnormal"}],
            "m_grid": [8],
            "n_grid": [8],
            "reps": 1000,
            "methods": ["oel"],
            "seed": 1,
        }
        path = tmp_path / "study.json"
        path.write_text(json.dumps(config), encoding="utf-8")
        code, out = run_cli(
            ["coverage", "--config", str(path), "--reps", "10"], capsys
        )
        assert code == 0
        assert json.loads(out)["reps"] == 10

    def test_bad_config_exits_2(self, tmp_path):
        path = tmp_path / "study.json"
        path.write_text("{\"x_dist\": []}", encoding="utf-8")
        assert main(["coverage", "--config", str(path)]) == 2


class TestBartlett:
    def test_output_keys(self, csv_2d, capsys):
        xp, yp, _ = csv_2d
        code, out = run_cli(
            ["bartlett", "--x", xp, "--y", yp, "--bootstrap-b", "150", "--seed", "5"], capsys
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["B"] == 150
        assert payload["used"] + payload["discarded"] == 150
        assert payload["eta"] > 0

    def test_solver_failure_exits_3(self, tmp_path, capsys):
        # one extreme x point makes most resamples infeasible at the MELE
        xp, yp = tmp_path / "x.csv", tmp_path / "y.csv"
        np.savetxt(xp, np.array([0.0, 0.1, -0.1, 0.05, 100.0]), delimiter=",")
        np.savetxt(yp, np.array([0.0, 0.3, 0.6, 0.9, 1.2]), delimiter=",")
        assert main(["bartlett", "--x", str(xp), "--y", str(yp), "--bootstrap-b", "150"]) == 3


class TestDeterminism:
    def test_byte_identical_reruns(self, csv_2d, tmp_path, capsys):
        xp, yp, _ = csv_2d
        outputs = []
        for rerun in range(2):
            out_path = tmp_path / f"out{rerun}.json"
            code = main(
                ["eval", "--x", xp, "--y", yp, "--method", "eel1",
                 "--theta", "0.0,0.0", "--seed", "9", "--out", str(out_path)]
            )
            assert code == 0
            outputs.append(out_path.read_bytes())
        assert outputs[0] == outputs[1]
