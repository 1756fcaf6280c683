"""Exception and warning types raised across the package."""


class DualMEError(Exception):
    """Base class for all package errors."""


class ConfigError(DualMEError, ValueError):
    """Invalid population parameters or run configuration."""


class DegenerateDesignError(ConfigError):
    """Sample size does not leave any unsampled units (n >= N)."""


class ZeroMeanError(ConfigError):
    """A mean that must act as a divisor is zero."""


class DegeneratePopulationError(ConfigError):
    """Generated population has no spread in X, so moments are undefined."""


class SingularityError(DualMEError, ArithmeticError):
    """A formula hit a vanishing denominator."""


class SingularTauError(SingularityError):
    """A tau value has a zero denominator.

    Attributes
    ----------
    index : int
        1-based tau index (or 0 when the tau belongs to an explicit (c1, c2)).
    """

    def __init__(self, index: int, message: str):
        super().__init__(message)
        self.index = index


class FlatObjectiveError(SingularityError):
    """The quadratic MSE has a (numerically) zero leading coefficient."""


class NonConvexObjectiveError(SingularityError):
    """The quadratic MSE is not convex, so its stationary point is no minimum."""


class SingularSystemError(SingularityError):
    """The 2x2 normal equations for (d1, d2) are singular."""


class ZeroR1Error(SingularityError):
    """r1 vanishes, so the wider-class optimum is undefined."""


class EstimatorDivisionError(SingularityError, ZeroDivisionError):
    """A point estimate divides by zero on the observed sample."""


class NonPositiveMSEError(SingularityError):
    """PRE requested against a nonpositive MSE."""


class MonteCarloFailure(DualMEError):
    """Too many replications produced a non-finite estimate."""

    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result


class ExpansionValidityWarning(UserWarning):
    """|tau * n1 * kappa_x| >= 1: the series behind the MSE formula diverges."""
