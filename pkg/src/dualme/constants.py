"""Population parameters of the measurement-error model and derived design constants.

Observed values are ``y_i = Y_i + dY_i`` and ``x_i = X_i + dX_i`` with mean-zero
errors that are independent of the true values and of each other. Every
first-order MSE in the package is written in terms of

    r0  = gamma * (S_Y^2 + S_dY^2)
    r1  = gamma * (S_X^2 + S_dX^2)
    r01 = gamma * rho * S_Y * S_X

with ``gamma = 1/n - 1/N``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

from .errors import ConfigError, DegenerateDesignError, ZeroMeanError

__all__ = ["PopulationParams", "DesignConstants", "derive_constants"]


@dataclass(frozen=True)
class PopulationParams:
    """Known moments of (Y, X) and the measurement-error variances.

    Parameters
    ----------
    N : int
        Population size.
    n : int
        Sample size, ``2 <= n < N``.
    mean_y, mean_x : float
        Population means of the true study and auxiliary variables.
    var_y, var_x : float
        Population variances (divisor N - 1) of the true values.
    var_ey, var_ex : float
        Measurement-error variances on Y and X.
    rho : float
        Correlation between true Y and X.
    """

    N: int
    n: int
    mean_y: float
    mean_x: float
    var_y: float
    var_x: float
    var_ey: float
    var_ex: float
    rho: float

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{f.name}: expected a number, got {v!r}")
            if not math.isfinite(v):
                raise ConfigError(f"{f.name}: must be finite, got {v!r}")
        if int(self.N) != self.N or int(self.n) != self.n:
            raise ConfigError("N and n must be integers")
        if self.n < 2:
            raise ConfigError(f"n: must be at least 2, got {self.n}")
        if self.n >= self.N:
            raise DegenerateDesignError(f"n: must be smaller than N (n={self.n}, N={self.N})")
        for name in ("var_y", "var_x", "var_ey", "var_ex"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name}: must be nonnegative, got {getattr(self, name)}")
        if abs(self.rho) > 1:
            raise ConfigError(f"rho: must lie in [-1, 1], got {self.rho}")
        if self.mean_x == 0:
            raise ZeroMeanError("mean_x: must be nonzero")

    @classmethod
    def from_dict(cls, d: dict) -> PopulationParams:
        names = {f.name for f in fields(cls)}
        missing = sorted(names - d.keys())
        if missing:
            raise ConfigError(f"missing field(s): {', '.join(missing)}")
        extra = sorted(d.keys() - names)
        if extra:
            raise ConfigError(f"unknown field(s): {', '.join(extra)}")
        return cls(**{k: d[k] for k in names})

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def beta(self) -> float:
        """Regression slope of true Y on true X, ``rho * S_Y / S_X``."""
        if self.var_x == 0:
            return 0.0
        return self.rho * math.sqrt(self.var_y) / math.sqrt(self.var_x)


@dataclass(frozen=True)
class DesignConstants:
    gamma: float
    n1: float
    R: float
    cy: float
    cx: float
    r0: float
    r1: float
    r01: float
    lam: float

    def to_dict(self) -> dict:
        return asdict(self)


def derive_constants(p: PopulationParams) -> DesignConstants:
    """Compute every design constant used by the analytic formulas.

    ``lam`` is ``(1 + gamma*C_yx) / (1 + gamma*C_x^2)`` with ``C_yx = rho*C_Y*C_X``.
    """
    N, n = p.N, p.n
    if n >= N:
        raise DegenerateDesignError(f"n must be smaller than N (n={n}, N={N})")
    if p.mean_x == 0:
        raise ZeroMeanError("mean_x must be nonzero")
    if p.mean_y == 0:
        raise ZeroMeanError("mean_y must be nonzero for C_Y and R-based constants")
    gamma = 1.0 / n - 1.0 / N
    n1 = n / (N - n)
    sy, sx = math.sqrt(p.var_y), math.sqrt(p.var_x)
    cy = sy / p.mean_y
    cx = sx / p.mean_x
    cyx = p.rho * cy * cx
    return DesignConstants(
        gamma=gamma,
        n1=n1,
        R=p.mean_y / p.mean_x,
        cy=cy,
        cx=cx,
        r0=gamma * (p.var_y + p.var_ey),
        r1=gamma * (p.var_x + p.var_ex),
        r01=gamma * p.rho * sy * sx,
        lam=(1.0 + gamma * cyx) / (1.0 + gamma * cx * cx),
    )
