import numpy as np
import pytest

from conftest import random_small_1d
from oracles import two_by_two_grid_logratio, two_sample_logratio
from twosample_el import (
    NotConverged,
    SolverOptions,
    TwoSampleData,
    classify_feasibility,
    oel_logratio,
    solve_profile,
)
from twosample_el.oel import _jacobian, _residual, _WarmLogRatio


class TestSolveProfile:
    def test_unconstrained_maximum_at_mele(self, canonical_1d):
        sol = solve_profile(canonical_1d, canonical_1d.mele())
        assert sol.log_ratio == 0.0
        assert sol.iterations == 0
        np.testing.assert_allclose(sol.lam, [0.0])
        np.testing.assert_allclose(sol.p, [0.5, 0.5])
        np.testing.assert_allclose(sol.q, [0.5, 0.5])

    def test_matches_grid_oracle(self, canonical_1d):
        sol = solve_profile(canonical_1d, [2.5])
        grid = two_by_two_grid_logratio([0.0, 1.0], [2.0, 3.0], 2.5)
        assert sol.log_ratio == pytest.approx(grid, abs=1e-6)

    def test_solution_invariants(self, canonical_1d):
        sol = solve_profile(canonical_1d, [2.5])
        assert sol.converged
        assert abs(sol.p.sum() - 1.0) < 1e-9
        assert abs(sol.q.sum() - 1.0) < 1e-9
        assert np.all(sol.p > 0) and np.all(sol.q > 0)
        assert abs((sol.mu_y - sol.mu_x)[0] - 2.5) < 1e-8

    def test_boundary_raises(self, canonical_1d):
        with pytest.raises(NotConverged):
            solve_profile(canonical_1d, [3.0])

    def test_theta_shape_validation(self, canonical_1d):
        with pytest.raises(ValueError, match="shape"):
            solve_profile(canonical_1d, [1.0, 2.0])


class TestOelLogratio:
    def test_zero_at_mele(self, example1_20):
        assert oel_logratio(example1_20, example1_20.mele()) == 0.0

    def test_infinite_outside(self, canonical_1d):
        assert oel_logratio(canonical_1d, [3.0]) == np.inf  # boundary
        assert oel_logratio(canonical_1d, [5.0]) == np.inf  # exterior

    def test_primal_dual_identity_on_seeded_instance(self, example1_20):
        # cross-check the dual value against the primal objective at (p, q)
        rng = np.random.default_rng(2)
        theta_hat = example1_20.mele()
        for _ in range(5):
            theta = theta_hat + rng.normal(scale=0.3, size=2)
            sol = solve_profile(example1_20, theta)
            primal = -2.0 * (
                np.log(example1_20.m * sol.p).sum() + np.log(example1_20.n * sol.q).sum()
            )
            assert sol.log_ratio == pytest.approx(primal, abs=1e-8)

    def test_agrees_with_profile_oracle_on_small_instances(self):
        rng = np.random.default_rng(99)
        for _ in range(10):
            data = random_small_1d(rng)
            lo = float(data.Y.min() - data.X.max())
            hi = float(data.Y.max() - data.X.min())
            theta = lo + (0.2 + 0.6 * rng.random()) * (hi - lo)
            want = two_sample_logratio(data.X[:, 0], data.Y[:, 0], theta)
            got = oel_logratio(data, [theta])
            assert got == pytest.approx(want, abs=1e-6)

    def test_nonnegative_and_zero_only_at_mele(self, example1_20):
        rng = np.random.default_rng(3)
        theta_hat = example1_20.mele()
        for _ in range(10):
            theta = theta_hat + rng.normal(scale=0.2, size=2)
            l = oel_logratio(example1_20, theta)
            assert l >= 0.0
            if np.linalg.norm(theta - theta_hat) > 1e-3:
                assert l > 0.0


class TestRayAndBoundaryBehavior:
    def test_ray_monotonicity(self, example1_20):
        rng = np.random.default_rng(8)
        theta_hat = example1_20.mele()
        for _ in range(10):
            direction = rng.normal(size=2)
            direction /= np.linalg.norm(direction)
            # pick an interior target along the ray
            target = theta_hat + 0.8 * direction
            if not np.isfinite(oel_logratio(example1_20, target)):
                target = theta_hat + 0.2 * direction
            values = [
                oel_logratio(example1_20, theta_hat + s * (target - theta_hat))
                for s in np.linspace(0.0, 1.0, 21)
            ]
            diffs = np.diff(values)
            assert np.all(diffs >= -1e-9)

    def test_blow_up_near_boundary(self, canonical_1d):
        # walking toward the boundary point 3.0: l passes 1e3 while the
        # feasibility slack is still above 1e-6
        theta = None
        for t in 1.0 - np.geomspace(1.0, 1e-9, 60):
            cand = 2.0 + t * 1.0
            if oel_logratio(canonical_1d, [cand]) > 1e3:
                theta = cand
                break
        assert theta is not None
        assert classify_feasibility(canonical_1d, [theta]).slack > 1e-6

    def test_affine_equivariance(self, example1_20):
        rng = np.random.default_rng(21)
        A = np.array([[1.3, 0.4], [-0.2, 0.9]])
        b = np.array([5.0, -3.0])
        c = np.array([-2.0, 7.0])
        theta_hat = example1_20.mele()
        data_t = TwoSampleData(example1_20.X @ A.T + b, example1_20.Y @ A.T + c)
        for _ in range(5):
            theta = theta_hat + rng.normal(scale=0.3, size=2)
            l_orig = oel_logratio(example1_20, theta)
            l_trans = oel_logratio(data_t, A @ theta + (c - b))
            assert l_trans == pytest.approx(l_orig, abs=1e-8)


class TestSolverInternals:
    def test_jacobian_matches_finite_differences(self, example1_20):
        d = example1_20.d
        theta = example1_20.mele() + np.array([0.25, -0.15])
        sol = solve_profile(example1_20, theta)
        # displaced evaluation point, still dual-feasible
        u = np.concatenate([0.6 * sol.lam, sol.mu_x + 0.03, sol.mu_y - 0.02])
        X, Y = example1_20.X, example1_20.Y
        f_m, f_n = example1_20.f_m, example1_20.f_n
        J = np.empty((3 * d, 3 * d))
        _jacobian(X, Y, f_m, f_n, u, J)
        J_fd = np.empty_like(J)
        h = 1e-7
        rp, rm = np.empty(3 * d), np.empty(3 * d)
        for col in range(3 * d):
            up, um = u.copy(), u.copy()
            up[col] += h
            um[col] -= h
            assert _residual(X, Y, theta, f_m, f_n, up, 1e-12, rp)
            assert _residual(X, Y, theta, f_m, f_n, um, 1e-12, rm)
            J_fd[:, col] = (rp - rm) / (2 * h)
        np.testing.assert_allclose(J, J_fd, atol=1e-6)

    def test_warm_start_matches_cold(self, example1_20):
        theta_hat = example1_20.mele()
        warm = _WarmLogRatio(example1_20)
        for s in np.linspace(0.0, 0.9, 10):
            theta = theta_hat + s * np.array([0.8, 0.5])
            assert warm.logratio(theta) == pytest.approx(
                oel_logratio(example1_20, theta), abs=1e-9
            )

    def test_options_validation(self):
        with pytest.raises(ValueError):
            SolverOptions(tol_residual=-1.0)
        with pytest.raises(ValueError):
            SolverOptions(step_shrink=1.5)
