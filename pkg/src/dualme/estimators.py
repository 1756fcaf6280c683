"""Point estimators of the population mean from an error-contaminated sample.

All families work off the two sample means and the dual transform

    xbar** = (N*mu_x - n*xbar) / (N - n) = mu_x - n1*(xbar - mu_x),

which is evaluated in the affine form to avoid cancellation when n << N.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import (
    ConfigError,
    DegenerateDesignError,
    EstimatorDivisionError,
    ExpansionValidityWarning,
    SingularityError,
    SingularTauError,
    ZeroMeanError,
)

__all__ = [
    "FAMILIES",
    "NAMED_MEMBERS",
    "ObservedSample",
    "EstimatorSpec",
    "sample_means",
    "dual_transform",
    "point_estimate",
    "estimate",
    "tau_values",
    "named_member_constants",
    "member_g",
    "member_derivatives",
    "member_constant_from_g1",
]

FAMILIES = (
    "MeanPerUnit",
    "DualRatio",
    "RatioCumDual",
    "WiderMember",
    "ModifiedDifference",
    "DiffCumDual",
)

_REQUIRED = {
    "MeanPerUnit": (),
    "DualRatio": (),
    "RatioCumDual": ("alpha",),
    "WiderMember": ("k", "eps"),
    "ModifiedDifference": ("J",),
    "DiffCumDual": ("d1", "d2", "c1", "c2", "c3"),
}

# Named members of the difference-cum-dual class: name -> (c1, c2, c3, tau index).
# c1 and c2 are symbolic in (rho, cx, mu_x) and resolved by named_member_constants.
NAMED_MEMBERS = {
    "yp1": ("-rho", "cx", 1, 1),
    "yp2": ("rho", "cx", -1, 3),
    "yp3": ("-rho", "cx", -1, 1),
    "yp4": ("-cx", "mu_x", -1, 5),
    "yp5": ("cx", "mu_x", -1, 6),
    "yp6": ("1", "cx", -1, 7),
    "yp7": ("1", "-cx", -1, 8),
}


@dataclass(frozen=True)
class ObservedSample:
    """Observed (x_i, y_i) pairs from an SRSWOR sample of a population of size N."""

    xs: np.ndarray
    ys: np.ndarray
    N: int

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        if xs.ndim != 1 or ys.ndim != 1 or len(xs) != len(ys):
            raise ConfigError("xs and ys must be 1-D sequences of equal length")
        if len(xs) == 0:
            raise ConfigError("empty sample")
        if len(xs) < 2:
            raise ConfigError(f"sample size must be at least 2, got {len(xs)}")
        if len(xs) >= self.N:
            raise DegenerateDesignError(f"sample size {len(xs)} must be smaller than N={self.N}")

    @property
    def n(self) -> int:
        return len(self.xs)


def sample_means(s: ObservedSample) -> tuple[float, float]:
    """Return ``(xbar, ybar)``."""
    if s.n == 0:
        raise ConfigError("empty sample")
    return float(np.mean(s.xs)), float(np.mean(s.ys))


def dual_transform(xbar, mu_x: float, N: int, n: int):
    """Reflect ``xbar`` about ``mu_x``: ``mu_x - n/(N-n) * (xbar - mu_x)``."""
    if n >= N:
        raise DegenerateDesignError(f"dual transform needs n < N (n={n}, N={N})")
    n1 = n / (N - n)
    if np.ndim(xbar):
        xbar = np.asarray(xbar, dtype=float)
    return mu_x - n1 * (xbar - mu_x)


@dataclass(frozen=True)
class EstimatorSpec:
    """One estimator: a family tag, its tuning constants and the shared knowns.

    ``beta`` is read only by ``DiffCumDual`` and ``lam`` only by
    ``ModifiedDifference``.
    """

    family: str
    mu_x: float
    constants: Mapping[str, float] = field(default_factory=dict)
    beta: float = 0.0
    lam: float = 1.0
    name: str | None = None

    def __post_init__(self):
        if self.family not in _REQUIRED:
            raise ConfigError(f"family: unknown estimator family {self.family!r}")
        missing = [k for k in _REQUIRED[self.family] if k not in self.constants]
        if missing:
            raise ConfigError(f"constants: {self.family} needs {', '.join(missing)}")
        object.__setattr__(self, "constants", {k: float(v) for k, v in self.constants.items()})
        if self.mu_x == 0:
            raise ZeroMeanError("mu_x must be nonzero")
        c = self.constants
        if self.family == "WiderMember" and c["k"] not in (1, 2, 3, 4):
            raise ConfigError(f"constants.k: member index must be 1..4, got {c['k']}")
        if self.family == "DiffCumDual":
            if c["c3"] not in (-1, 0, 1):
                raise ConfigError(f"constants.c3: must be -1, 0 or 1, got {c['c3']}")
            if c["c1"] * self.mu_x + c["c2"] == 0:
                raise SingularTauError(0, "c1*mu_x + c2 must be nonzero")

    @property
    def tau(self) -> float:
        """``c1 / (c1*mu_x + c2)`` for the difference-cum-dual family."""
        c = self.constants
        return c["c1"] / (c["c1"] * self.mu_x + c["c2"])

    def to_dict(self) -> dict:
        d = {"family": self.family, "mu_x": self.mu_x, "constants": dict(self.constants)}
        if self.family == "DiffCumDual":
            d["beta"] = self.beta
        if self.family == "ModifiedDifference":
            d["lambda"] = self.lam
        if self.name is not None:
            d["name"] = self.name
        return d

    @classmethod
    def from_dict(cls, d: Mapping, params=None) -> EstimatorSpec:
        """Build a spec from its JSON form.

        ``family`` may also be one of the member names ``yp1``..``yp7``; the
        (c1, c2, c3) triple is then resolved from ``rho`` and ``cx`` given in
        ``constants`` or, failing that, from ``params`` (a PopulationParams).
        """
        d = dict(d)
        try:
            family = d.pop("family")
            mu_x = d.pop("mu_x", None)
        except KeyError:
            raise ConfigError("family: missing discriminator") from None
        constants = dict(d.pop("constants", {}))
        beta = d.pop("beta", None)
        lam = d.pop("lambda", d.pop("lam", 1.0))
        name = d.pop("name", None)
        if d:
            raise ConfigError(f"unknown estimator field(s): {', '.join(sorted(d))}")
        if mu_x is None:
            if params is None:
                raise ConfigError("mu_x: required")
            mu_x = params.mean_x
        if beta is None:
            beta = params.beta if params is not None else 0.0
        if family in NAMED_MEMBERS:
            rho = constants.pop("rho", None)
            cx = constants.pop("cx", None)
            if rho is None or cx is None:
                if params is None:
                    raise ConfigError(f"{family}: needs rho and cx (in constants or from params)")
                rho = params.rho if rho is None else rho
                cx = math.sqrt(params.var_x) / params.mean_x if cx is None else cx
            c1, c2, c3 = named_member_constants(family, mu_x, cx, rho)
            constants.update(c1=c1, c2=c2, c3=c3)
            name = name or family
            family = "DiffCumDual"
        return cls(family=family, mu_x=float(mu_x), constants=constants, beta=float(beta),
                   lam=float(lam), name=name)


def named_member_constants(member: str, mu_x: float, cx: float, rho: float) -> tuple[float, float, int]:
    """Resolve an named member to its ``(c1, c2, c3)``."""
    try:
        s1, s2, c3, _ = NAMED_MEMBERS[member]
    except KeyError:
        raise ConfigError(f"unknown named member {member!r}") from None
    env = {"rho": rho, "cx": cx, "mu_x": mu_x, "1": 1.0}

    def val(sym):
        return -env[sym[1:]] if sym.startswith("-") else env[sym]

    return val(s1), val(s2), c3


def tau_values(mu_x: float, cx: float, rho: float) -> tuple[float, ...]:
    """The eight tau values ``c1/(c1*mu_x + c2)`` of the named members.

    tau4 is listed identical to tau1 and is returned as such.
    """
    rows = [
        (rho, rho * mu_x - cx),
        (1.0, mu_x - cx * cx),
        (rho, rho * mu_x + cx),
        (rho, rho * mu_x - cx),
        (cx, mu_x * (cx - 1.0)),
        (cx, mu_x * (cx + 1.0)),
        (1.0, mu_x + cx),
        (1.0, mu_x - cx),
    ]
    out = []
    for i, (num, den) in enumerate(rows, start=1):
        if abs(den) <= 1e-12 * max(1.0, abs(mu_x), abs(cx) ** 2):
            raise SingularTauError(i, f"tau{i}: denominator vanishes (mu_x={mu_x}, cx={cx}, rho={rho})")
        out.append(num / den)
    return tuple(out)


def member_g(k: int, eps, ybar, u):
    """g(ybar, u) for the wider-class member ``k`` (u = xbar**/mu_x)."""
    if k == 1:
        return ybar * (eps + (1.0 - eps) * u)
    if k == 2:
        return ybar * (2.0 - u ** (-eps))
    if k == 3:
        return ybar * (1.0 + eps * (u - 1.0))
    if k == 4:
        return ybar * (1.0 / u + eps * (1.0 - 1.0 / u))
    raise ConfigError(f"member index must be 1..4, got {k}")


def member_derivatives(k: int, eps: float, mean_y: float) -> tuple[float, float, float, float]:
    """Taylor coefficients ``(G1, G2, G3, G4)`` of member ``k`` at ``(mean_y, 1)``.

    G1 = dg/du, G2 = 1/2 d2g/du2, G3 = d2g/dy du, G4 = 1/2 d2g/dy2.
    """
    Y = mean_y
    if k == 1:
        return Y * (1.0 - eps), 0.0, 1.0 - eps, 0.0
    if k == 2:
        return Y * eps, -0.5 * Y * eps * (eps + 1.0), eps, 0.0
    if k == 3:
        return Y * eps, 0.0, eps, 0.0
    if k == 4:
        return Y * (eps - 1.0), Y * (1.0 - eps), eps - 1.0, 0.0
    raise ConfigError(f"member index must be 1..4, got {k}")


def member_constant_from_g1(k: int, g1: float, mean_y: float) -> float:
    """Tuning constant that gives member ``k`` the slope ``g1`` in u at ``(mean_y, 1)``."""
    if mean_y == 0:
        raise ZeroMeanError("mean_y must be nonzero")
    if k == 1:
        return 1.0 - g1 / mean_y
    if k in (2, 3):
        return g1 / mean_y
    if k == 4:
        return 1.0 + g1 / mean_y
    raise ConfigError(f"member index must be 1..4, got {k}")


def point_estimate(spec: EstimatorSpec, xbar, ybar, N: int, n: int):
    """Vectorised point estimate from sample means.

    Works elementwise on arrays; invalid divisions come back as non-finite
    values instead of raising.
    """
    xbar = np.asarray(xbar, dtype=float)
    ybar = np.asarray(ybar, dtype=float)
    mu = spec.mu_x
    c = spec.constants
    xss = dual_transform(xbar, mu, N, n)
    u = xss / mu
    fam = spec.family
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if fam == "MeanPerUnit":
            out = ybar * 1.0
        elif fam == "DualRatio":
            out = ybar * u
        elif fam == "RatioCumDual":
            a = c["alpha"]
            out = ybar * (a * mu / xbar + (1.0 - a) * u)
        elif fam == "WiderMember":
            out = member_g(int(c["k"]), c["eps"], ybar, u)
        elif fam == "ModifiedDifference":
            J = c["J"]
            out = (1.0 - J) * ybar + J * spec.lam * ybar * u
        else:
            c1, c2, c3 = c["c1"], c["c2"], int(c["c3"])
            ratio = (c1 * xss + c2) / (c1 * mu + c2)
            reg = ybar + spec.beta * (mu - xss)
            out = c["d1"] * reg + c["d2"] * ybar * ratio ** c3
    return out if out.ndim else float(out)


def estimate(spec: EstimatorSpec, s: ObservedSample) -> float:
    """Point estimate of the population mean of Y for one observed sample.

    Raises
    ------
    EstimatorDivisionError
        If xbar = 0 (RatioCumDual), u** = 0 (members 2 and 4) or
        c1*xbar** + c2 = 0 (DiffCumDual with c3 = -1).

    Warns
    -----
    ExpansionValidityWarning
        For DiffCumDual when ``|tau * n1 * (xbar - mu_x)| >= 1``; the estimate
        itself is still returned.
    """
    xbar, ybar = sample_means(s)
    N, n = s.N, s.n
    mu = spec.mu_x
    c = spec.constants
    xss = dual_transform(xbar, mu, N, n)
    fam = spec.family
    if fam == "RatioCumDual" and xbar == 0:
        raise EstimatorDivisionError("RatioCumDual: sample mean of x is zero")
    if fam == "WiderMember" and int(c["k"]) in (2, 4) and xss == 0:
        raise EstimatorDivisionError(f"WiderMember {int(c['k'])}: u** is zero")
    if fam == "DiffCumDual":
        if c["c3"] == -1 and c["c1"] * xss + c["c2"] == 0:
            raise EstimatorDivisionError("DiffCumDual: c1*xbar** + c2 is zero")
        n1 = n / (N - n)
        if abs(spec.tau * n1 * (xbar - mu)) >= 1:
            warnings.warn(
                f"|tau*n1*kappa_x| = {abs(spec.tau * n1 * (xbar - mu)):.3g} >= 1; "
                "first-order MSE expansion not valid for this sample",
                ExpansionValidityWarning,
                stacklevel=2,
            )
    out = point_estimate(spec, xbar, ybar, N, n)
    if not math.isfinite(out):
        raise SingularityError(f"{fam}: non-finite estimate {out}")
    return out
