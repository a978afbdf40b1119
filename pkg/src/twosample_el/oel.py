"""Inner profile solver and the original two-sample empirical log-likelihood ratio.

For a candidate mean difference ``theta`` the profile problem maximizes the
product of multinomial weights on the two samples subject to the weighted
means differing by ``theta``.  Its Lagrangian dual is a 3d-dimensional root
problem in the multiplier ``lam`` and the profiled means ``mu_x``, ``mu_y``:

    R1: sum_i (X_i - mu_x) / (1 - f_m lam.(X_i - mu_x)) = 0
    R2: sum_j (Y_j - mu_y) / (1 + f_n lam.(Y_j - mu_y)) = 0
    R3: sum_j q_j Y_j - sum_i p_i X_i = theta

with weights p_i = (1/m) / (1 - f_m lam.(X_i - mu_x)) and
q_j = (1/n) / (1 + f_n lam.(Y_j - mu_y)).  The log-likelihood ratio is

    l(theta) = 2 [ sum_i log(1 - f_m lam.(X_i - mu_x))
                 + sum_j log(1 + f_n lam.(Y_j - mu_y)) ].

The solver is a damped Newton iteration on the full 3d system with
step-halving that keeps every log argument strictly positive, plus a
continuation fallback that walks from the MELE (where the solution is
trivial) toward the query point with warm starts.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import TwoSampleData, classify_feasibility, compute_diagnostics
from .errors import NotConverged, RankDeficient

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap

__all__ = ["SolverOptions", "ELSolution", "solve_profile", "oel_logratio"]

# Step-halving guard on the log arguments, and the halving budget per step.
_LOG_ARG_GUARD = 1e-12
_MAX_HALVINGS = 40

# Kernel exit codes.
_CONVERGED = 0
_BUDGET_EXHAUSTED = 1
_SINGULAR = 2
_STALLED = 3


@dataclass(frozen=True)
class SolverOptions:
    """Tolerances and budgets for the inner Newton solver.

    ``tol_residual`` is relative: convergence is declared when the infinity
    norm of the (per-sample averaged) residual drops below
    ``tol_residual * (1 + data magnitude)``, which keeps the stopping rule
    usable under affine rescalings of the data.
    """

    tol_residual: float = 1e-10
    max_newton_iters: int = 50
    max_continuation_steps: int = 64
    step_shrink: float = 0.5

    def __post_init__(self):
        if self.tol_residual <= 0 or self.max_newton_iters <= 0 or self.max_continuation_steps <= 0:
            raise ValueError("solver tolerances and budgets must be positive")
        if not 0.0 < self.step_shrink < 1.0:
            raise ValueError("step_shrink must lie in (0, 1)")


DEFAULT_OPTIONS = SolverOptions()


@dataclass(frozen=True)
class ELSolution:
    """Converged state of the inner profile problem at one ``theta``.

    ``lam`` is the Lagrange multiplier, ``mu_x``/``mu_y`` the profiled means
    (their difference equals the queried ``theta`` up to solver tolerance),
    ``p``/``q`` the implied weights, and ``log_ratio`` the value of the
    log-likelihood ratio (nonnegative, zero exactly at the MELE).
    """

    lam: np.ndarray
    mu_x: np.ndarray
    mu_y: np.ndarray
    p: np.ndarray
    q: np.ndarray
    log_ratio: float
    iterations: int
    residual_norm: float
    converged: bool


@njit(cache=True, nogil=True)
def _residual(X, Y, theta, f_m, f_n, u, guard, res):
    """Fill res with the averaged dual residuals; False when a log argument hits the guard."""
    m, d = X.shape
    n = Y.shape[0]
    for k in range(3 * d):
        res[k] = 0.0
    for i in range(m):
        t = 0.0
        for k in range(d):
            t += u[k] * (X[i, k] - u[d + k])
        a = 1.0 - f_m * t
        if a <= guard:
            return False
        inv = 1.0 / a
        for k in range(d):
            res[k] += (X[i, k] - u[d + k]) * inv
            res[2 * d + k] -= X[i, k] * inv / m
    for k in range(d):
        res[k] /= m
    for j in range(n):
        t = 0.0
        for k in range(d):
            t += u[k] * (Y[j, k] - u[2 * d + k])
        b = 1.0 + f_n * t
        if b <= guard:
            return False
        inv = 1.0 / b
        for k in range(d):
            res[d + k] += (Y[j, k] - u[2 * d + k]) * inv
            res[2 * d + k] += Y[j, k] * inv / n
    for k in range(d):
        res[d + k] /= n
        res[2 * d + k] -= theta[k]
    return True


@njit(cache=True, nogil=True)
def _jacobian(X, Y, f_m, f_n, u, J):
    """Analytic Jacobian of the averaged residuals w.r.t. u = (lam, mu_x, mu_y)."""
    m, d = X.shape
    n = Y.shape[0]
    for r in range(3 * d):
        for c in range(3 * d):
            J[r, c] = 0.0
    sum_inv_a = 0.0
    for i in range(m):
        t = 0.0
        for k in range(d):
            t += u[k] * (X[i, k] - u[d + k])
        a = 1.0 - f_m * t
        inv = 1.0 / a
        inv2 = inv * inv
        sum_inv_a += inv
        for r in range(d):
            vr = X[i, r] - u[d + r]
            for c in range(d):
                vc = X[i, c] - u[d + c]
                J[r, c] += f_m * vr * vc * inv2 / m
                J[2 * d + r, c] -= f_m * X[i, r] * vc * inv2 / m
                J[r, d + c] -= f_m * vr * u[c] * inv2 / m
                J[2 * d + r, d + c] += f_m * X[i, r] * u[c] * inv2 / m
    for r in range(d):
        J[r, d + r] -= sum_inv_a / m
    sum_inv_b = 0.0
    for j in range(n):
        t = 0.0
        for k in range(d):
            t += u[k] * (Y[j, k] - u[2 * d + k])
        b = 1.0 + f_n * t
        inv = 1.0 / b
        inv2 = inv * inv
        sum_inv_b += inv
        for r in range(d):
            wr = Y[j, r] - u[2 * d + r]
            for c in range(d):
                wc = Y[j, c] - u[2 * d + c]
                J[d + r, c] -= f_n * wr * wc * inv2 / n
                J[2 * d + r, c] -= f_n * Y[j, r] * wc * inv2 / n
                J[d + r, 2 * d + c] += f_n * wr * u[c] * inv2 / n
                J[2 * d + r, 2 * d + c] += f_n * Y[j, r] * u[c] * inv2 / n
    for r in range(d):
        J[d + r, 2 * d + r] -= sum_inv_b / n


@njit(cache=True, nogil=True)
def _log_ratio_at(X, Y, f_m, f_n, u):
    m, d = X.shape
    n = Y.shape[0]
    total = 0.0
    for i in range(m):
        t = 0.0
        for k in range(d):
            t += u[k] * (X[i, k] - u[d + k])
        total += np.log(1.0 - f_m * t)
    for j in range(n):
        t = 0.0
        for k in range(d):
            t += u[k] * (Y[j, k] - u[2 * d + k])
        total += np.log(1.0 + f_n * t)
    return 2.0 * total


@njit(cache=True, nogil=True)
def _newton_kernel(X, Y, theta, f_m, f_n, u, tol, max_iters, guard, step_shrink, max_halvings):
    """Damped Newton on the dual system; mutates u. Returns (status, iters, norm, log_ratio)."""
    d = X.shape[1]
    res = np.empty(3 * d)
    res_new = np.empty(3 * d)
    J = np.empty((3 * d, 3 * d))
    u_new = np.empty(3 * d)

    if not _residual(X, Y, theta, f_m, f_n, u, guard, res):
        return _STALLED, 0, np.inf, 0.0
    norm = np.abs(res).max()
    if not np.isfinite(norm):
        return _SINGULAR, 0, np.inf, 0.0
    it = 0
    while norm > tol:
        if it >= max_iters:
            return _BUDGET_EXHAUSTED, it, norm, 0.0
        _jacobian(X, Y, f_m, f_n, u, J)
        du = np.linalg.solve(J, -res)
        finite = True
        for k in range(3 * d):
            if not np.isfinite(du[k]):
                finite = False
        if not finite:
            return _SINGULAR, it, norm, 0.0

        step = 1.0
        accepted = False
        new_norm = norm
        for h in range(max_halvings + 1):
            for k in range(3 * d):
                u_new[k] = u[k] + step * du[k]
            if _residual(X, Y, theta, f_m, f_n, u_new, guard, res_new):
                new_norm = np.abs(res_new).max()
                # Demand progress while far from tolerance; near it, any
                # feasible step is fine (roundoff makes the norm noisy).
                # Overflowed residuals (nan) are never acceptable.
                if np.isfinite(new_norm) and (
                    new_norm < norm or norm <= 100.0 * tol or h == max_halvings
                ):
                    accepted = True
                    break
            step *= step_shrink
        if not accepted:
            return _STALLED, it, norm, 0.0
        for k in range(3 * d):
            u[k] = u_new[k]
            res[k] = res_new[k]
        norm = new_norm
        it += 1
    return _CONVERGED, it, norm, _log_ratio_at(X, Y, f_m, f_n, u)


def _default_start(mean_x, theta_hat, theta, m, n):
    """Default start: lam = 0, discrepancy split across the profiled means.

    The split weight n/(m+n) is the first-order allocation: the profiled mean
    of the larger sample moves less.
    """
    d = mean_x.shape[0]
    u = np.empty(3 * d)
    u[:d] = 0.0
    mu_x0 = mean_x + (n / (m + n)) * (theta_hat - theta)
    u[d : 2 * d] = mu_x0
    u[2 * d :] = mu_x0 + theta
    return u


def _solve_arrays(X, Y, theta, f_m, f_n, opts, init=None):
    """Solve the dual system for raw arrays.

    Returns (u, log_ratio, iterations, residual_norm) or raises
    NotConverged / RankDeficient.  ``init`` is an optional warm-start vector
    (lam, mu_x, mu_y) from a nearby solve.
    """
    m, d = X.shape
    n = Y.shape[0]
    mean_x = X.mean(axis=0)
    theta_hat = Y.mean(axis=0) - mean_x
    scale = 1.0 + max(np.abs(X).max(), np.abs(Y).max(), np.abs(theta).max())
    tol = opts.tol_residual * scale
    saw_singular = False

    def attempt(target, u0):
        nonlocal saw_singular
        u = u0.copy()
        try:
            status, iters, norm, lr = _newton_kernel(
                X, Y, target, f_m, f_n, u,
                tol, opts.max_newton_iters, _LOG_ARG_GUARD, opts.step_shrink, _MAX_HALVINGS,
            )
        except np.linalg.LinAlgError:
            saw_singular = True
            return None
        if status == _SINGULAR:
            saw_singular = True
        if status != _CONVERGED or not np.isfinite(lr):
            return None
        return u, lr, iters, norm

    starts = []
    if init is not None:
        starts.append(np.asarray(init, dtype=np.float64).reshape(3 * d))
    starts.append(_default_start(mean_x, theta_hat, theta, m, n))
    for u0 in starts:
        out = attempt(theta, u0)
        if out is not None:
            return out

    # Continuation: walk from the MELE (trivial solution) toward theta with
    # warm starts, doubling the number of steps until the budget is spent.
    k = 2
    while k <= opts.max_continuation_steps:
        u = _default_start(mean_x, theta_hat, theta_hat, m, n)
        out = None
        for t in np.linspace(0.0, 1.0, k + 1)[1:]:
            target = theta if t == 1.0 else theta_hat + t * (theta - theta_hat)
            out = attempt(target, u)
            if out is None:
                break
            u = out[0]
        if out is not None:
            return out
        k *= 2

    if saw_singular:
        rank_tol_ok = compute_diagnostics(TwoSampleData(X, Y)).rank_ok
        if not rank_tol_ok:
            raise RankDeficient("singular Newton system: a sample covariance is rank deficient")
    raise NotConverged(
        "profile solver did not converge (theta is likely on or outside the feasible boundary)",
    )


def _weights_from(X, Y, f_m, f_n, u):
    d = X.shape[1]
    lam = u[:d]
    a = 1.0 - f_m * ((X - u[d : 2 * d]) @ lam)
    b = 1.0 + f_n * ((Y - u[2 * d :]) @ lam)
    return 1.0 / (X.shape[0] * a), 1.0 / (Y.shape[0] * b)


def _check_theta(data, theta):
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    if theta.shape != (data.d,):
        raise ValueError(f"theta must have shape ({data.d},), got {theta.shape}")
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta must be finite")
    return theta


def solve_profile(
    data: TwoSampleData,
    theta,
    opts: SolverOptions = DEFAULT_OPTIONS,
    init=None,
) -> ELSolution:
    """Solve the inner profile problem at ``theta``.

    Raises NotConverged when the budget is exhausted (which for well
    conditioned data signals a query on or outside the feasible boundary)
    and RankDeficient when the Newton system is singular because a sample
    covariance is numerically rank deficient.
    """
    theta = _check_theta(data, theta)
    u, lr, iters, norm = _solve_arrays(data.X, data.Y, theta, data.f_m, data.f_n, opts, init=init)
    if lr < 0.0:
        if lr < -1e-8:
            raise NotConverged("converged to a spurious root with negative log-ratio", norm, iters)
        lr = 0.0
    p, q = _weights_from(data.X, data.Y, data.f_m, data.f_n, u)
    d = data.d
    return ELSolution(
        lam=u[:d].copy(),
        mu_x=u[d : 2 * d].copy(),
        mu_y=u[2 * d :].copy(),
        p=p,
        q=q,
        log_ratio=lr,
        iterations=iters,
        residual_norm=norm,
        converged=True,
    )


def _logratio_or_inf(X, Y, theta, f_m, f_n, opts, init=None):
    """Lean path: log-ratio value, or +inf on any solver failure; no LP certificate.

    Returns (value, u) where u is the solution vector (None on failure), so
    callers evaluating along a path can warm-start the next query.
    """
    try:
        u, lr, _, _ = _solve_arrays(X, Y, theta, f_m, f_n, opts, init=init)
    except (NotConverged, RankDeficient):
        return float("inf"), None
    return max(lr, 0.0), u


def oel_logratio(data: TwoSampleData, theta, opts: SolverOptions = DEFAULT_OPTIONS) -> float:
    """Original two-sample empirical log-likelihood ratio, extended-real valued.

    Returns +inf when ``theta`` lies on or outside the feasible region or the
    solver certifies divergence; never raises.  When the solver fails at a
    point the feasibility LP still classifies as interior, one retry with an
    enlarged budget is made before giving up.
    """
    theta = _check_theta(data, theta)
    value, _ = _logratio_or_inf(data.X, data.Y, theta, data.f_m, data.f_n, opts)
    if np.isfinite(value):
        return value
    feas = classify_feasibility(data, theta)
    if feas.is_interior:
        boosted = replace(
            opts,
            max_newton_iters=2 * opts.max_newton_iters,
            max_continuation_steps=8 * opts.max_continuation_steps,
        )
        value, _ = _logratio_or_inf(data.X, data.Y, theta, data.f_m, data.f_n, boosted)
        return value
    return float("inf")


class _WarmLogRatio:
    """Log-ratio evaluator that warm-starts each solve from the previous one.

    Intended for sequences of nearby queries (ray bisections, contour
    tracing).  Falls back to the cold-start path automatically whenever the
    warm start fails, so results match one-shot solves.
    """

    def __init__(self, data: TwoSampleData, opts: SolverOptions = DEFAULT_OPTIONS):
        self._X = data.X
        self._Y = data.Y
        self._f_m = data.f_m
        self._f_n = data.f_n
        self._opts = opts
        self._last_u = None

    def logratio(self, theta) -> float:
        theta = np.asarray(theta, dtype=np.float64)
        value, u = _logratio_or_inf(
            self._X, self._Y, theta, self._f_m, self._f_n, self._opts, init=self._last_u
        )
        if u is not None:
            self._last_u = u
        return value
