"""Distribution samplers and the Monte Carlo coverage study harness.

Every replicate draws from a stream keyed by (seed, m, n, replicate), so a
study's output is bit-identical no matter how replicates are scheduled;
setting the EL_THREADS environment variable (or ``threads=``) runs the
replicates of each cell on a thread pool without changing the result.

Convention for failed inner solves at the true difference: for OEL/BEL a
failure means the statistic is +inf, a legitimate non-coverage event, so the
replicate counts as not covered.  The extended statistics are finite
everywhere and are evaluated normally.  Only a failed Bartlett bootstrap
marks a replicate as failed (for BEL/EEL2), excluding it from their
denominator.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product

import numpy as np

from .core import TwoSampleData
from .eel import estimate_bartlett_bootstrap, expansion_factor, default_delta, inverse_map, MappingSpec
from .errors import RankDeficient, TooFewReplicates
from .oel import DEFAULT_OPTIONS, SolverOptions, _logratio_or_inf
from .regions import chisq_quantile

__all__ = [
    "Marginal",
    "MarginalSpec",
    "StudyConfig",
    "CoverageCell",
    "CoverageTable",
    "MappingDistanceResult",
    "sample",
    "coverage_study",
    "mapping_distance_study",
    "chisq1_vs_normal",
    "chisq3_vs_exponential",
    "study_config_to_json_dict",
    "study_config_from_json_dict",
]

_KNOWN_METHODS = ("oel", "eel1", "bel", "eel2")
_BOOTSTRAP_TAG = 0xB007


@dataclass(frozen=True)
class Marginal:
    """One univariate component: chi-square, exponential, or standard normal."""

    kind: str
    df: int = 0
    rate: float = float("nan")

    def __post_init__(self):
        if self.kind == "chisquare":
            if self.df < 1:
                raise ValueError("chi-square marginal needs df >= 1")
        elif self.kind == "exponential":
            if not self.rate > 0.0:
                raise ValueError("exponential marginal needs rate > 0")
        elif self.kind != "stdnormal":
            raise ValueError(f"unknown marginal kind {self.kind!r}")

    @classmethod
    def chi_square(cls, df: int) -> "Marginal":
        return cls("chisquare", df=df)

    @classmethod
    def exponential(cls, rate: float = 1.0) -> "Marginal":
        return cls("exponential", rate=rate)

    @classmethod
    def std_normal(cls) -> "Marginal":
        return cls("stdnormal")

    @property
    def mean(self) -> float:
        if self.kind == "chisquare":
            return float(self.df)
        if self.kind == "exponential":
            return 1.0 / self.rate
        return 0.0

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "chisquare":
            return rng.gamma(self.df / 2.0, 2.0, size=count)
        if self.kind == "exponential":
            # inverse CDF on the open unit interval
            return -np.log1p(-rng.random(count)) / self.rate
        return rng.standard_normal(count)


@dataclass(frozen=True)
class MarginalSpec:
    """Product of independent marginals forming a d-variate distribution."""

    marginals: tuple[Marginal, ...]

    def __post_init__(self):
        if not self.marginals:
            raise ValueError("at least one marginal is required")

    @classmethod
    def of(cls, *marginals: Marginal) -> "MarginalSpec":
        return cls(tuple(marginals))

    @property
    def d(self) -> int:
        return len(self.marginals)

    @property
    def true_mean(self) -> np.ndarray:
        return np.array([mg.mean for mg in self.marginals])

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        out = np.empty((count, self.d))
        for k, mg in enumerate(self.marginals):
            out[:, k] = mg.sample(count, rng)
        return out


def sample(dist: MarginalSpec, count: int, stream: np.random.Generator) -> np.ndarray:
    """Draw ``count`` rows from a product distribution, fully determined by the stream."""
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    return dist.sample(count, stream)


def chisq1_vs_normal() -> tuple[MarginalSpec, MarginalSpec]:
    """Benchmark pair: X with two independent chi-square(1) coordinates, Y standard bivariate normal."""
    return (
        MarginalSpec.of(Marginal.chi_square(1), Marginal.chi_square(1)),
        MarginalSpec.of(Marginal.std_normal(), Marginal.std_normal()),
    )


def chisq3_vs_exponential() -> tuple[MarginalSpec, MarginalSpec]:
    """Benchmark pair: X with two chi-square(3) coordinates, Y with two unit-rate exponentials."""
    return (
        MarginalSpec.of(Marginal.chi_square(3), Marginal.chi_square(3)),
        MarginalSpec.of(Marginal.exponential(1.0), Marginal.exponential(1.0)),
    )


@dataclass(frozen=True)
class StudyConfig:
    """Configuration of a coverage study over a grid of sample sizes.

    ``methods`` holds method names; for "bel" and "eel2" the Bartlett
    constant is estimated per replicate by a bootstrap of size
    ``bootstrap_B`` on that replicate's data.
    """

    x_dist: MarginalSpec
    y_dist: MarginalSpec
    m_grid: tuple[int, ...]
    n_grid: tuple[int, ...]
    reps: int
    alpha: float = 0.05
    methods: tuple[str, ...] = ("oel", "eel1")
    bootstrap_B: int = 200
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "m_grid", tuple(int(v) for v in self.m_grid))
        object.__setattr__(self, "n_grid", tuple(int(v) for v in self.n_grid))
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.reps < 1:
            raise ValueError(f"reps must be at least 1, got {self.reps}")
        if not self.m_grid or not self.n_grid:
            raise ValueError("sample-size grids must be nonempty")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.x_dist.d != self.y_dist.d:
            raise ValueError("x_dist and y_dist must have the same dimension")
        unknown = [meth for meth in self.methods if meth not in _KNOWN_METHODS]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; choose from {_KNOWN_METHODS}")
        if len(set(self.methods)) != len(self.methods):
            raise ValueError("methods must be distinct")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")

    @property
    def theta0(self) -> np.ndarray:
        return self.y_dist.true_mean - self.x_dist.true_mean


@dataclass(frozen=True)
class CoverageCell:
    m: int
    n: int
    method: str
    coverage: float
    mc_se: float
    failures: int


@dataclass(frozen=True)
class CoverageTable:
    """Simulated coverage per (m, n, method), with Monte Carlo standard errors."""

    cells: tuple[CoverageCell, ...]
    reps: int
    alpha: float
    seed: int

    def get(self, m: int, n: int, method: str) -> CoverageCell:
        for cell in self.cells:
            if cell.m == m and cell.n == n and cell.method == method:
                return cell
        raise KeyError(f"no cell for (m={m}, n={n}, method={method})")

    def to_csv_text(self) -> str:
        lines = ["m,n,method,coverage,mc_se,failures"]
        for cell in self.cells:
            lines.append(
                f"{cell.m},{cell.n},{cell.method},{cell.coverage!r},{cell.mc_se!r},{cell.failures}"
            )
        return "\n".join(lines) + "\n"


def _bootstrap_seed(seed: int, m: int, n: int, rep: int) -> int:
    ss = np.random.SeedSequence((seed, m, n, rep, _BOOTSTRAP_TAG))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _replicate_outcomes(config: StudyConfig, m: int, n: int, rep: int, cutoff: float,
                        opts: SolverOptions) -> dict:
    """Coverage outcome of one replicate: method -> True/False, or None on failure."""
    rng = np.random.default_rng(np.random.SeedSequence((config.seed, m, n, rep)))
    X = config.x_dist.sample(m, rng)
    Y = config.y_dist.sample(n, rng)
    theta0 = config.theta0
    N = m + n
    f_m, f_n = N / m, N / n
    theta_hat = Y.mean(axis=0) - X.mean(axis=0)
    d = X.shape[1]

    out = {}
    eta = None
    eta_failed = False
    if "bel" in config.methods or "eel2" in config.methods:
        try:
            eta = estimate_bartlett_bootstrap(
                TwoSampleData(X, Y), config.bootstrap_B, _bootstrap_seed(config.seed, m, n, rep), opts
            ).eta
        except (TooFewReplicates, RankDeficient):
            eta_failed = True

    if "oel" in config.methods or "bel" in config.methods:
        l0, _ = _logratio_or_inf(X, Y, theta0, f_m, f_n, opts)
        if "oel" in config.methods:
            out["oel"] = l0 <= cutoff
        if "bel" in config.methods:
            out["bel"] = None if eta_failed else l0 <= cutoff * (1.0 + eta / N)

    def extended_covered(spec: MappingSpec) -> bool:
        shrunk = theta_hat + (theta0 - theta_hat) / expansion_factor(N, cutoff, spec)
        l_s, _ = _logratio_or_inf(X, Y, shrunk, f_m, f_n, opts)
        return l_s <= cutoff

    if "eel1" in config.methods:
        out["eel1"] = extended_covered(MappingSpec.first_order())
    if "eel2" in config.methods:
        if eta_failed:
            out["eel2"] = None
        else:
            out["eel2"] = extended_covered(MappingSpec.second_order(eta, default_delta(m, n)))
    return out


def _thread_count(threads: int | None) -> int:
    if threads is not None:
        return max(1, threads)
    env = os.environ.get("EL_THREADS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def coverage_study(
    config: StudyConfig,
    opts: SolverOptions = DEFAULT_OPTIONS,
    threads: int | None = None,
) -> CoverageTable:
    """Simulate coverage of the configured methods at the true mean difference.

    For each (m, n) cell and each replicate, fresh samples are drawn and each
    method's region is tested for containing the true difference.  Bartlett
    constants for BEL/EEL2 are re-estimated per replicate by bootstrap.
    """
    d = config.x_dist.d
    cutoff = chisq_quantile(d, 1.0 - config.alpha)
    workers = _thread_count(threads)
    cells = []
    for m, n in product(config.m_grid, config.n_grid):
        covered = {meth: 0 for meth in config.methods}
        valid = {meth: 0 for meth in config.methods}
        failures = {meth: 0 for meth in config.methods}

        def run(rep, m=m, n=n):
            return _replicate_outcomes(config, m, n, rep, cutoff, opts)

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                outcomes = list(pool.map(run, range(config.reps)))
        else:
            outcomes = [run(rep) for rep in range(config.reps)]

        for out in outcomes:
            for meth in config.methods:
                result = out[meth]
                if result is None:
                    failures[meth] += 1
                else:
                    valid[meth] += 1
                    covered[meth] += bool(result)
        for meth in config.methods:
            cov = covered[meth] / valid[meth] if valid[meth] else float("nan")
            mc_se = math.sqrt(cov * (1.0 - cov) / config.reps) if valid[meth] else float("nan")
            cells.append(CoverageCell(m, n, meth, cov, mc_se, failures[meth]))
    return CoverageTable(tuple(cells), config.reps, config.alpha, config.seed)


@dataclass(frozen=True)
class MappingDistanceResult:
    """Medians of the pull-back distance at the true difference, by sample size."""

    sizes: tuple[int, ...]
    medians: tuple[float, ...]
    slope: float


def mapping_distance_study(
    config: StudyConfig,
    opts: SolverOptions = DEFAULT_OPTIONS,
) -> MappingDistanceResult:
    """How far the inverse mapping moves the true difference, as m = n grows.

    Requires an m = n grid with at least three sizes; uses the first-order
    mapping.  Returns per-size medians of |theta0' - theta0| and the slope of
    a log-log least squares fit (theory predicts roughly -1.5).
    """
    if tuple(config.m_grid) != tuple(config.n_grid) or len(config.m_grid) < 3:
        raise ValueError("mapping_distance_study needs m_grid == n_grid with at least 3 sizes")
    theta0 = config.theta0
    spec = MappingSpec.first_order()
    sizes = tuple(config.m_grid)
    medians = []
    for n in sizes:
        dists = np.empty(config.reps)
        for rep in range(config.reps):
            rng = np.random.default_rng(np.random.SeedSequence((config.seed, n, n, rep)))
            X = config.x_dist.sample(n, rng)
            Y = config.y_dist.sample(n, rng)
            inv = inverse_map(TwoSampleData(X, Y), theta0, spec, opts)
            dists[rep] = np.linalg.norm(inv.theta_prime - theta0)
        medians.append(float(np.median(dists)))
    slope = float(np.polyfit(np.log(sizes), np.log(medians), 1)[0])
    return MappingDistanceResult(sizes, tuple(medians), slope)


def _marginal_to_dict(mg: Marginal) -> dict:
    if mg.kind == "chisquare":
        return {"kind": "chisquare", "df": mg.df}
    if mg.kind == "exponential":
        return {"kind": "exponential", "rate": mg.rate}
    return {"kind": "stdnormal"}


def _marginal_from_dict(entry: dict) -> Marginal:
    kind = entry.get("kind")
    if kind == "chisquare":
        return Marginal.chi_square(int(entry["df"]))
    if kind == "exponential":
        return Marginal.exponential(float(entry["rate"]))
    if kind == "stdnormal":
        return Marginal.std_normal()
    raise ValueError(f"unknown marginal kind {kind!r}")


def study_config_to_json_dict(config: StudyConfig) -> dict:
    return {
        "x_dist": [_marginal_to_dict(mg) for mg in config.x_dist.marginals],
        "y_dist": [_marginal_to_dict(mg) for mg in config.y_dist.marginals],
        "m_grid": list(config.m_grid),
        "n_grid": list(config.n_grid),
        "reps": config.reps,
        "alpha": config.alpha,
        "methods": list(config.methods),
        "bootstrap_B": config.bootstrap_B,
        "seed": config.seed,
    }


def study_config_from_json_dict(payload: dict) -> StudyConfig:
    try:
        x_dist = MarginalSpec.of(*(_marginal_from_dict(e) for e in payload["x_dist"]))
        y_dist = MarginalSpec.of(*(_marginal_from_dict(e) for e in payload["y_dist"]))
        return StudyConfig(
            x_dist=x_dist,
            y_dist=y_dist,
            m_grid=tuple(payload["m_grid"]),
            n_grid=tuple(payload["n_grid"]),
            reps=int(payload["reps"]),
            alpha=float(payload.get("alpha", 0.05)),
            methods=tuple(payload.get("methods", ("oel", "eel1"))),
            bootstrap_B=int(payload.get("bootstrap_B", 200)),
            seed=int(payload.get("seed", 0)),
        )
    except KeyError as exc:
        raise ValueError(f"study config is missing required key {exc}") from exc
