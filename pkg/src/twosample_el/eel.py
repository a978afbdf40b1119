"""Similarity-mapping extension of the empirical log-likelihood ratio.

The original log-likelihood ratio ``l`` is finite only on the interior of the
feasible region, while the parameter lives in all of R^d.  The composite
similarity mapping stretches each level contour radially about the MELE by a
scalar expansion factor ``gamma(N, l) >= 1``, turning the bounded feasible
region into all of R^d.  The extended ratio ``l*`` is ``l`` composed with the
mapping's inverse: finite everywhere, zero exactly at the MELE, and with the
same asymptotic null distribution.

Two expansion factors are provided: the first-order ``1 + l/(2N)`` and a
second-order ``1 + (eta/(2N)) l**delta`` whose Bartlett constant ``eta``
sharpens the coverage error; ``eta`` can be estimated here by a within-sample
bootstrap of the mean of ``l`` at the MELE.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import TwoSampleData, compute_diagnostics
from .errors import RankDeficient, TooFewReplicates
from .oel import DEFAULT_OPTIONS, SolverOptions, _logratio_or_inf, _WarmLogRatio, oel_logratio

__all__ = [
    "MappingOrder",
    "MappingSpec",
    "InverseResult",
    "BartlettEstimate",
    "expansion_factor",
    "forward_map",
    "inverse_map",
    "eel_logratio",
    "estimate_bartlett_bootstrap",
    "default_delta",
]

# Inverse-map bisection stopping rules: residual of the ray equation, and the
# bracket width floor.
_RAY_RESIDUAL_TOL = 1e-10
_BRACKET_WIDTH_TOL = 1e-12

#: Floor applied to nonpositive Bartlett estimates (the second-order mapping
#: must expand, so eta has to stay positive).
ETA_FLOOR = 1e-6


class MappingOrder(Enum):
    FIRST_ORDER = "first-order"
    SECOND_ORDER = "second-order"


@dataclass(frozen=True)
class MappingSpec:
    """Which expansion factor to use.

    ``eta`` (Bartlett constant, > 0) and ``delta`` (exponent in (0, 1]) are
    only consulted by the second-order factor.
    """

    order: MappingOrder
    eta: float = float("nan")
    delta: float = float("nan")

    def __post_init__(self):
        if self.order is MappingOrder.SECOND_ORDER:
            if not (self.eta > 0.0):
                raise ValueError("second-order mapping requires eta > 0")
            if not (0.0 < self.delta <= 1.0):
                raise ValueError("second-order mapping requires 0 < delta <= 1")

    @classmethod
    def first_order(cls) -> "MappingSpec":
        return cls(MappingOrder.FIRST_ORDER)

    @classmethod
    def second_order(cls, eta: float, delta: float) -> "MappingSpec":
        return cls(MappingOrder.SECOND_ORDER, eta=eta, delta=delta)


FIRST_ORDER = MappingSpec.first_order()


@dataclass(frozen=True)
class InverseResult:
    """Inverse image of a point under the composite similarity mapping.

    ``theta_prime = mele + s * (theta - mele)`` with ray parameter
    ``s in [0, 1)`` (s = 0 exactly at the MELE), and ``l_at_prime`` the
    log-likelihood ratio at the inverse image.
    """

    theta_prime: np.ndarray
    s: float
    l_at_prime: float
    bracket_width: float


@dataclass(frozen=True)
class BartlettEstimate:
    """Bootstrap estimate of the Bartlett constant.

    ``clamped`` flags a raw estimate at or below zero that was floored to
    keep the second-order mapping expansive.
    """

    eta: float
    raw_eta: float
    clamped: bool
    discarded: int
    used: int
    B: int

    def __float__(self):
        return self.eta


def default_delta(m: int, n: int) -> float:
    """Default exponent for the second-order factor: min(m, n) ** -0.5."""
    if m < 2 or n < 2:
        raise ValueError("m and n must be at least 2")
    return min(m, n) ** -0.5


def expansion_factor(N: int, l: float, spec: MappingSpec) -> float:
    """Radial expansion factor applied at log-likelihood level ``l``; always >= 1."""
    if N < 2:
        raise ValueError("N must be at least 2")
    if l < 0.0:
        raise ValueError(f"log-likelihood ratio must be nonnegative, got {l}")
    if spec.order is MappingOrder.FIRST_ORDER:
        return 1.0 + l / (2.0 * N)
    return 1.0 + (spec.eta / (2.0 * N)) * l**spec.delta


def forward_map(
    data: TwoSampleData,
    theta,
    spec: MappingSpec = FIRST_ORDER,
    opts: SolverOptions = DEFAULT_OPTIONS,
) -> np.ndarray:
    """Image of an interior ``theta`` under the composite similarity mapping."""
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    l = oel_logratio(data, theta, opts)
    if not np.isfinite(l):
        raise ValueError("theta is on or outside the feasible boundary; the mapping needs an interior point")
    theta_hat = data.mele()
    return theta_hat + expansion_factor(data.N, l, spec) * (theta - theta_hat)


def inverse_map(
    data: TwoSampleData,
    theta,
    spec: MappingSpec = FIRST_ORDER,
    opts: SolverOptions = DEFAULT_OPTIONS,
) -> InverseResult:
    """Unique preimage of any finite ``theta`` under the similarity mapping.

    Solves g(s) = s * gamma(N, l(mele + s (theta - mele))) - 1 = 0 on the
    ray from the MELE through ``theta``; g is strictly increasing with
    g(0) = -1, so the root is bracketed (treating l = +inf beyond the
    feasible segment as g = +inf) and bisected until |g| <= 1e-10 or the
    bracket width falls below 1e-12.

    Slowly growing expansion factors (the second-order one, with its l**delta
    growth) cannot represent points far past the feasible hull in floats: the
    weights behind l scale like exp(l / 2N), so l saturates near 1e3-1e4.
    For such extreme queries the returned ray parameter is still correct to
    bracket width, but ``l_at_prime`` reports the largest level the inner
    solver could certify rather than the (astronomically large) exact one.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    if theta.shape != (data.d,):
        raise ValueError(f"theta must have shape ({data.d},), got {theta.shape}")
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta must be finite")
    theta_hat = data.mele()
    direction = theta - theta_hat
    if not np.any(direction):
        return InverseResult(theta_hat.copy(), 0.0, 0.0, 0.0)

    evaluator = _WarmLogRatio(data, opts)
    N = data.N

    def g(s):
        l = evaluator.logratio(theta_hat + s * direction)
        if not np.isfinite(l):
            return float("inf"), l
        return s * expansion_factor(N, l, spec) - 1.0, l

    lo = 0.0
    hi = 0.9
    g_hi, _ = g(hi)
    while g_hi <= 0.0:
        lo = hi
        nxt = 0.5 * (1.0 + hi)
        if nxt <= hi:
            # Bracket collapsed onto s = 1: the ratio is numerically zero all
            # along the ray, so the mapping is the identity there.
            l_end = evaluator.logratio(theta)
            return InverseResult(theta.copy(), 1.0, max(l_end, 0.0), 0.0)
        hi = nxt
        g_hi, _ = g(hi)

    s_root = None
    l_root = None
    while hi - lo > _BRACKET_WIDTH_TOL:
        mid = 0.5 * (lo + hi)
        g_mid, l_mid = g(mid)
        if np.isfinite(g_mid) and abs(g_mid) <= _RAY_RESIDUAL_TOL:
            s_root, l_root = mid, l_mid
            break
        if g_mid <= 0.0:
            lo = mid
        else:
            hi = mid
    if s_root is None:
        # Width stop: take the inner bracket end, where l is guaranteed finite.
        s_root = lo
        _, l_root = g(lo)
        if not np.isfinite(l_root):  # lo == 0 never lands here: l(0) = 0
            l_root = 0.0
    return InverseResult(theta_hat + s_root * direction, s_root, max(l_root, 0.0), hi - lo)


def eel_logratio(
    data: TwoSampleData,
    theta,
    spec: MappingSpec = FIRST_ORDER,
    opts: SolverOptions = DEFAULT_OPTIONS,
) -> float:
    """Extended empirical log-likelihood ratio: finite for every finite theta."""
    return inverse_map(data, theta, spec, opts).l_at_prime


def estimate_bartlett_bootstrap(
    data: TwoSampleData,
    B: int,
    rng_seed: int,
    opts: SolverOptions = DEFAULT_OPTIONS,
    max_discard_fraction: float = 0.2,
) -> BartlettEstimate:
    """Bootstrap estimate of the Bartlett constant from the mean of l at the MELE.

    Draws ``B`` within-sample resamples, evaluates the log-likelihood ratio of
    each at the original MELE, discards resamples where the solve fails (the
    MELE falls outside the resample's feasible region), and calibrates
    ``eta = N * (mean(l) / d - 1)``.  Replicate streams are keyed by
    (rng_seed, replicate index), so results do not depend on evaluation order.
    """
    if B < 100:
        raise ValueError(f"B must be at least 100, got {B}")
    diag = compute_diagnostics(data)
    if not diag.rank_ok:
        raise RankDeficient("a sample covariance is rank deficient; the Bartlett bootstrap needs full rank")
    theta_hat = diag.mele
    X, Y = data.X, data.Y
    m, n = data.m, data.n

    total = 0.0
    used = 0
    for b in range(B):
        rng = np.random.default_rng(np.random.SeedSequence((rng_seed, b)))
        Xb = X[rng.integers(0, m, m)]
        Yb = Y[rng.integers(0, n, n)]
        l_b, _ = _logratio_or_inf(Xb, Yb, theta_hat, data.f_m, data.f_n, opts)
        if np.isfinite(l_b):
            total += l_b
            used += 1
    discarded = B - used
    if discarded > max_discard_fraction * B:
        raise TooFewReplicates(
            f"{discarded}/{B} bootstrap replicates failed to converge (limit {max_discard_fraction:.0%})"
        )
    raw_eta = data.N * (total / used / data.d - 1.0)
    clamped = raw_eta <= 0.0
    if clamped:
        warnings.warn(
            f"bootstrap Bartlett estimate {raw_eta:.3g} is nonpositive; clamping to {ETA_FLOOR}",
            RuntimeWarning,
            stacklevel=2,
        )
    return BartlettEstimate(
        eta=ETA_FLOOR if clamped else raw_eta,
        raw_eta=raw_eta,
        clamped=clamped,
        discarded=discarded,
        used=used,
        B=B,
    )
