"""Self-validation of the test oracles against independent references."""

import numpy as np
import pytest
from scipy.optimize import minimize
from scipy.special import gammainc

from conftest import random_small_1d
from oracles import (
    chisq_quantile_oracle,
    one_sample_logratio,
    reg_inc_gamma_lower,
    two_by_two_grid_logratio,
    two_sample_logratio,
)


class TestProfileOracle:
    def test_matches_literal_grid_on_2x2(self):
        x = np.array([0.0, 1.0])
        y = np.array([2.0, 3.0])
        for theta in (2.2, 2.5, 2.9):
            grid = two_by_two_grid_logratio(x, y, theta)
            prof = two_sample_logratio(x, y, theta)
            assert prof == pytest.approx(grid, abs=1e-8)

    def test_matches_constrained_primal_optimizer(self):
        # third route: SLSQP on the raw weight parameterization
        rng = np.random.default_rng(11)
        for _ in range(5):
            data = random_small_1d(rng)
            x, y = data.X[:, 0], data.Y[:, 0]
            m, n = len(x), len(y)
            theta_hat = y.mean() - x.mean()
            theta = theta_hat + 0.25 * (min(y.max() - x.min(), 3.0) - theta_hat)

            def neg_obj(w):
                p, q = w[:m], w[m:]
                return -(np.sum(np.log(m * p)) + np.sum(np.log(n * q)))

            cons = [
                {"type": "eq", "fun": lambda w: np.sum(w[:m]) - 1.0},
                {"type": "eq", "fun": lambda w: np.sum(w[m:]) - 1.0},
                {"type": "eq", "fun": lambda w: np.dot(w[m:], y) - np.dot(w[:m], x) - theta},
            ]
            w0 = np.concatenate([np.full(m, 1.0 / m), np.full(n, 1.0 / n)])
            best = None
            for scale in (0.0, 0.02):
                start = w0 + scale * np.random.default_rng(1).normal(size=m + n)
                res = minimize(
                    neg_obj, start, method="SLSQP", constraints=cons,
                    bounds=[(1e-9, 1.0)] * (m + n),
                    options={"maxiter": 500, "ftol": 1e-14},
                )
                if res.success:
                    val = 2.0 * res.fun
                    best = val if best is None else min(best, val)
            assert best is not None
            oracle = two_sample_logratio(x, y, theta)
            assert oracle == pytest.approx(best, abs=2e-5)

    def test_one_sample_boundary_is_infinite(self):
        z = np.array([0.0, 1.0, 2.0])
        assert one_sample_logratio(z, 2.0) == np.inf
        assert one_sample_logratio(z, -0.5) == np.inf
        assert one_sample_logratio(z, 1.0) == pytest.approx(0.0, abs=1e-12)


class TestIncompleteGammaOracle:
    @pytest.mark.parametrize("a", [0.5, 1.0, 2.5, 7.0])
    @pytest.mark.parametrize("x", [0.01, 0.5, 1.0, 3.0, 10.0, 40.0])
    def test_against_scipy(self, a, x):
        assert reg_inc_gamma_lower(a, x) == pytest.approx(float(gammainc(a, x)), abs=1e-13)

    def test_quantile_oracle_round_trip(self):
        for d in (1, 2, 5):
            for p in (0.5, 0.9, 0.95, 0.99):
                c = chisq_quantile_oracle(d, p)
                assert reg_inc_gamma_lower(d / 2.0, c / 2.0) == pytest.approx(p, abs=1e-12)
