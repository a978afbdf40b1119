"""Exception hierarchy shared across the package."""


class ELError(Exception):
    """Base class for all errors raised by this package."""


class NotConverged(ELError):
    """Inner profile solver exhausted its budget without meeting tolerance.

    Usually means the queried point sits on or outside the boundary of the
    region where the log-likelihood ratio is finite.
    """

    def __init__(self, message, residual_norm=float("nan"), iterations=0):
        super().__init__(message)
        self.residual_norm = residual_norm
        self.iterations = iterations


class RankDeficient(ELError):
    """Newton system singular: a sample covariance is numerically rank deficient."""


class TooFewReplicates(ELError):
    """More than the tolerated share of bootstrap replicates failed to converge."""


class BracketFailure(ELError):
    """A root bracket for an interval endpoint or contour radius could not be found."""


class FeasibilityLPError(ELError):
    """The feasibility linear program failed for a reason other than infeasibility."""
