"""Two-sample empirical likelihood inference for multivariate mean differences.

Provides the original empirical log-likelihood ratio for the difference of
two means, its domain-extended first- and second-order versions built on a
radial similarity mapping, Bartlett-corrected calibration, confidence
intervals and 2-d contours, and a reproducible Monte Carlo coverage harness.
"""

from .core import (
    DataDiagnostics,
    Feasibility,
    FeasibilityClass,
    TwoSampleData,
    classify_feasibility,
    compute_diagnostics,
    load_sample_csv,
    load_two_sample,
)
from .eel import (
    BartlettEstimate,
    InverseResult,
    MappingOrder,
    MappingSpec,
    default_delta,
    eel_logratio,
    estimate_bartlett_bootstrap,
    expansion_factor,
    forward_map,
    inverse_map,
)
from .errors import (
    BracketFailure,
    ELError,
    FeasibilityLPError,
    NotConverged,
    RankDeficient,
    TooFewReplicates,
)
from .oel import ELSolution, SolverOptions, oel_logratio, solve_profile
from .regions import (
    Method,
    MethodKind,
    RegionResult,
    chisq_quantile,
    contains,
    contour_2d,
    interval_1d,
    method_statistic,
    polyline_to_csv,
    region_to_json_dict,
)
from .simulate import (
    CoverageCell,
    CoverageTable,
    MappingDistanceResult,
    Marginal,
    MarginalSpec,
    StudyConfig,
    chisq1_vs_normal,
    chisq3_vs_exponential,
    coverage_study,
    mapping_distance_study,
    sample,
)

__version__ = "0.1.0"
