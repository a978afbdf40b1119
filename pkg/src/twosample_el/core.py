"""Data model, sample statistics, and feasibility geometry for two-sample inference.

The parameter of interest throughout the package is the difference of the two
population means, estimated by the difference of sample means (the maximum
empirical likelihood estimator, MELE).  A candidate difference ``theta`` is
*feasible* when it can be written as a difference of convex combinations of
the observed rows of the two samples; the set of all such differences is a
bounded closed region, and the log-likelihood ratio is finite exactly on its
interior.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.optimize import linprog

from .errors import FeasibilityLPError

__all__ = [
    "TwoSampleData",
    "DataDiagnostics",
    "Feasibility",
    "FeasibilityClass",
    "compute_diagnostics",
    "classify_feasibility",
    "load_sample_csv",
    "load_two_sample",
]

#: Default LP slack above which a point is classified interior.
DEFAULT_INTERIOR_TOL = 1e-9

#: Default smallest/largest eigenvalue ratio below which a covariance is
#: reported rank deficient.
DEFAULT_RANK_TOL = 1e-10


def _as_sample_matrix(arr, name):
    a = np.asarray(arr, dtype=np.float64)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix of observations, got ndim={a.ndim}")
    if a.shape[0] == 0:
        raise ValueError(f"{name} has no rows")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return np.ascontiguousarray(a)


@dataclass(frozen=True)
class TwoSampleData:
    """Two independent samples of d-dimensional observations.

    ``X`` holds m rows, ``Y`` holds n rows.  The derived constants
    ``N = m + n``, ``f_m = N/m`` and ``f_n = N/n`` appear throughout the
    dual formulation of the profile problem.  Each sample must have more
    observations than dimensions.
    """

    X: np.ndarray
    Y: np.ndarray
    m: int = field(init=False)
    n: int = field(init=False)
    d: int = field(init=False)
    N: int = field(init=False)
    f_m: float = field(init=False)
    f_n: float = field(init=False)

    def __post_init__(self):
        X = _as_sample_matrix(self.X, "X")
        Y = _as_sample_matrix(self.Y, "Y")
        if X.shape[1] != Y.shape[1]:
            raise ValueError(
                f"X and Y must have the same number of columns, got {X.shape[1]} and {Y.shape[1]}"
            )
        m, d = X.shape
        n = Y.shape[0]
        if m <= d or n <= d:
            raise ValueError(f"each sample needs more rows than columns (m={m}, n={n}, d={d})")
        N = m + n
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "f_m", N / m)
        object.__setattr__(self, "f_n", N / n)

    def mele(self):
        """Difference of sample means, the maximum empirical likelihood estimate."""
        return self.Y.mean(axis=0) - self.X.mean(axis=0)


@dataclass(frozen=True)
class DataDiagnostics:
    """Sample means, the MELE, covariances, and a full-rank indicator."""

    mean_x: np.ndarray
    mean_y: np.ndarray
    mele: np.ndarray
    cov_x: np.ndarray
    cov_y: np.ndarray
    rank_ok: bool


class FeasibilityClass(Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    EXTERIOR = "exterior"


@dataclass(frozen=True)
class Feasibility:
    """Classification of a candidate mean difference against the feasible region.

    ``slack`` is the maximal achievable minimum weight over all weight pairs
    realizing the candidate; it is positive strictly inside the region, zero
    (to tolerance) on its boundary, and negative or undefined outside.
    """

    classification: FeasibilityClass
    slack: float

    @property
    def is_interior(self):
        return self.classification is FeasibilityClass.INTERIOR

    @property
    def is_boundary(self):
        return self.classification is FeasibilityClass.BOUNDARY

    @property
    def is_exterior(self):
        return self.classification is FeasibilityClass.EXTERIOR


def _rank_ok(cov, rank_tol):
    eig = np.linalg.eigvalsh(cov)
    largest = eig[-1]
    if largest <= 0.0:
        return False
    return bool(eig[0] / largest > rank_tol)


def compute_diagnostics(data: TwoSampleData, rank_tol: float = DEFAULT_RANK_TOL) -> DataDiagnostics:
    """Sample means, MELE and covariances, with a numerical full-rank check.

    Rank deficiency is reported through ``rank_ok``, never raised: a
    covariance counts as full rank when its smallest/largest eigenvalue
    ratio exceeds ``rank_tol``.
    """
    mean_x = data.X.mean(axis=0)
    mean_y = data.Y.mean(axis=0)
    cov_x = np.cov(data.X, rowvar=False, ddof=1).reshape(data.d, data.d)
    cov_y = np.cov(data.Y, rowvar=False, ddof=1).reshape(data.d, data.d)
    ok = _rank_ok(cov_x, rank_tol) and _rank_ok(cov_y, rank_tol)
    return DataDiagnostics(
        mean_x=mean_x,
        mean_y=mean_y,
        mele=mean_y - mean_x,
        cov_x=cov_x,
        cov_y=cov_y,
        rank_ok=ok,
    )


def classify_feasibility(
    data: TwoSampleData,
    theta,
    tol_interior: float = DEFAULT_INTERIOR_TOL,
) -> Feasibility:
    """Classify ``theta`` as interior / boundary / exterior of the feasible region.

    Solves the linear program

        maximize s  subject to  p_i >= s, q_j >= s, sum p = 1, sum q = 1,
                                sum_j q_j Y_j - sum_i p_i X_i = theta

    with free weight signs.  The optimum ``s`` is the achievable minimum
    weight: interior means some strictly positive weight pair realizes
    ``theta``; an optimum below zero (or an infeasible program) means no
    nonnegative pair does.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    if theta.shape != (data.d,):
        raise ValueError(f"theta must have shape ({data.d},), got {theta.shape}")
    m, n, d = data.m, data.n, data.d
    nv = m + n + 1  # variables: p (m), q (n), s

    cost = np.zeros(nv)
    cost[-1] = -1.0  # maximize s

    # s - p_i <= 0 and s - q_j <= 0
    a_ub = np.zeros((m + n, nv))
    a_ub[:m, :m] = -np.eye(m)
    a_ub[m:, m : m + n] = -np.eye(n)
    a_ub[:, -1] = 1.0
    b_ub = np.zeros(m + n)

    a_eq = np.zeros((2 + d, nv))
    a_eq[0, :m] = 1.0
    a_eq[1, m : m + n] = 1.0
    a_eq[2:, :m] = -data.X.T
    a_eq[2:, m : m + n] = data.Y.T
    b_eq = np.concatenate(([1.0, 1.0], theta))

    bounds = [(None, None)] * (m + n) + [(None, 1.0)]
    res = linprog(cost, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs")

    if res.status == 2:  # infeasible
        return Feasibility(FeasibilityClass.EXTERIOR, float("-inf"))
    if res.status != 0:
        raise FeasibilityLPError(f"feasibility LP failed: {res.message} (status {res.status})")

    slack = float(-res.fun)
    if slack > tol_interior:
        cls = FeasibilityClass.INTERIOR
    elif slack < 0.0:
        cls = FeasibilityClass.EXTERIOR
    else:
        cls = FeasibilityClass.BOUNDARY
    return Feasibility(cls, slack)


def _looks_like_header(line: str) -> bool:
    fields = [f.strip() for f in line.split(",")]
    for f in fields:
        try:
            float(f)
        except ValueError:
            return True
    return False


def load_sample_csv(path) -> np.ndarray:
    """Load one sample from CSV: one row per observation, d numeric columns.

    A single leading header row is auto-detected (any non-numeric field) and
    skipped.  Files must be UTF-8 with decimal-point notation.
    """
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        first = fh.readline()
        if not first.strip():
            raise ValueError(f"{path}: empty file")
        skip = 1 if _looks_like_header(first) else 0
    data = np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2, encoding="utf-8")
    return data


def load_two_sample(x_path, y_path) -> TwoSampleData:
    """Load both samples from CSV files and validate them jointly."""
    X = load_sample_csv(x_path)
    Y = load_sample_csv(y_path)
    if X.shape[1] != Y.shape[1]:
        raise ValueError(
            f"dimension mismatch: {x_path} has {X.shape[1]} columns, {y_path} has {Y.shape[1]}"
        )
    return TwoSampleData(X, Y)
