"""First-order bias, MSE and optimum constants for every estimator family.

The ratio-cum-dual, modified-difference and difference-cum-dual families
all have an MSE that is a quadratic form in their free constants,

    Ybar^2 + w^2 v1 + (1-w)^2 v2 - 2 w v3 - 2 (1-w) v4 + 2 w (1-w) v5     (scalar w)
    Ybar^2 + d1^2 D1 + d2^2 D2 - 2 d1 D3 - 2 d2 D4 + 2 d1 d2 D5          (pair d1, d2)

so the coefficient sets below carry everything needed to evaluate, optimise
and audit them.
"""

from __future__ import annotations

import logging
import math
from fractions import Fraction
from dataclasses import dataclass, field

from .constants import DesignConstants, PopulationParams, derive_constants
from .errors import (
    ConfigError,
    FlatObjectiveError,
    NonConvexObjectiveError,
    NonPositiveMSEError,
    SingularityError,
    SingularSystemError,
    SingularTauError,
    ZeroR1Error,
)
from .estimators import NAMED_MEMBERS, member_constant_from_g1, member_derivatives, named_member_constants

logger = logging.getLogger(__name__)

__all__ = [
    "CoefficientSet",
    "AnalyticResult",
    "Condition",
    "var_mean",
    "mse_dual_ratio",
    "coeffs",
    "mse_quadratic",
    "mse_pair",
    "optimum_scalar",
    "optimum_pair",
    "phi_p_exact",
    "mean_per_unit_analytics",
    "dual_ratio_analytics",
    "ratio_cum_dual_analytics",
    "wider_class_analytics",
    "modified_difference_analytics",
    "diff_cum_dual_analytics",
    "named_member_analytics",
    "pre",
    "analyze",
    "efficiency_conditions",
    "TABLE_ROWS",
]

FLAT_TOL = 1e-12
CROSSCHECK_RTOL = 1e-8

TABLE_ROWS = ("ybar", "e1", "e2", "Y1", "Y2") + tuple(f"Yp{i}" for i in range(1, 8))


@dataclass(frozen=True)
class CoefficientSet:
    """Five quadratic-form coefficients, indexed 1..5 via ``cs[i]``."""

    kind: str
    values: tuple[float, float, float, float, float]
    context: dict = field(default_factory=dict)

    def __getitem__(self, i: int) -> float:
        if not 1 <= i <= 5:
            raise IndexError("coefficients are indexed 1..5")
        return self.values[i - 1]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "values": list(self.values), "context": dict(self.context)}


@dataclass
class AnalyticResult:
    """Analytic summary of one estimator under one parameter set.

    ``mse`` is evaluated at the constants actually used (the optimum unless
    the caller pinned them); ``min_mse`` is always at the optimum.
    """

    name: str
    bias: float | None
    mse: float | None
    min_mse: float | None
    optimum_constants: dict = field(default_factory=dict)
    coefficients: CoefficientSet | None = None
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> dict:
        return {
            "estimator": self.name,
            "status": self.status,
            "bias": self.bias,
            "mse": self.mse,
            "min_mse": self.min_mse,
            "optimum_constants": dict(self.optimum_constants),
            "coefficients": None if self.coefficients is None else self.coefficients.to_dict(),
        }


def var_mean(dc: DesignConstants, p: PopulationParams | None = None) -> float:
    """Variance of the sample mean under measurement error, ``gamma*(S_Y^2 + S_dY^2)``."""
    return dc.r0


def mse_dual_ratio(dc: DesignConstants, p: PopulationParams, with_me: bool = True) -> float:
    """MSE of the dual-to-ratio estimator ``ybar * xbar**/mu_x``.

    Without measurement error this is ``gamma*Ybar^2*(C_Y^2 + n1^2 C_X^2 - 2 n1 rho C_Y C_X)``.
    """
    if not with_me:
        g, n1 = dc.gamma, dc.n1
        return g * p.mean_y ** 2 * (dc.cy ** 2 + n1 ** 2 * dc.cx ** 2 - 2 * n1 * p.rho * dc.cy * dc.cx)
    n1, R = dc.n1, dc.R
    return dc.r0 + n1 ** 2 * R ** 2 * dc.r1 - 2 * n1 * R * dc.r01


def coeffs(kind: str, dc: DesignConstants, p: PopulationParams, *, lam: float | None = None,
           tau: float | None = None, c3: int | None = None, beta: float | None = None) -> CoefficientSet:
    """Coefficient set of the requested kind.

    A: ratio-cum-dual without measurement error (scaled by Ybar^2).
    B: ratio-cum-dual with measurement error.
    C: modified difference class; ``lam`` defaults to ``dc.lam``.
    D: difference-cum-dual class; needs ``tau`` and ``c3``, ``beta`` defaults
       to the population regression slope.
    """
    Y = p.mean_y
    Y2 = Y * Y
    g, n1, R = dc.gamma, dc.n1, dc.R
    r0, r1, r01 = dc.r0, dc.r1, dc.r01
    if kind == "A":
        cy, cx, rho = dc.cy, dc.cx, p.rho
        k = rho * cy * cx
        vals = (
            1 + g * (cy ** 2 + 3 * cx ** 2 - 4 * k),
            1 + g * (cy ** 2 + n1 ** 2 * cx ** 2 - 4 * n1 * k),
            1 + g * (cx ** 2 - k),
            1 - n1 * g * k,
            1 + g * (cy ** 2 + cx ** 2 * (1 + n1) - 2 * k * (1 + n1)),
        )
        return CoefficientSet("A", vals, {})
    if kind == "B":
        vals = (
            Y2 + r0 + 3 * R ** 2 * r1 - 4 * R * r01,
            Y2 + r0 + n1 ** 2 * R ** 2 * r1 - 4 * n1 * R * r01,
            Y2 + R ** 2 * r1 - R * r01,
            Y2 - n1 * R * r01,
            # cross moment is 2(1+n1)R r01, matching the error-free A5 term
            Y2 + r0 + (1 + n1) * R ** 2 * r1 - 2 * (1 + n1) * R * r01,
        )
        return CoefficientSet("B", vals, {})
    if kind == "C":
        lam = dc.lam if lam is None else lam
        vals = (
            lam ** 2 * (Y2 + r0 + n1 ** 2 * R ** 2 * r1 - 4 * n1 * R * r01),
            # (1-J) ybar carries no lambda
            Y2 + r0,
            lam * (Y2 - n1 * R * r01),
            Y2,
            lam * (Y2 + r0 - 2 * n1 * R * r01),
        )
        return CoefficientSet("C", vals, {"lambda": lam})
    if kind == "D":
        if tau is None or c3 is None:
            raise ConfigError("D coefficients need tau and c3")
        if c3 not in (-1, 0, 1):
            raise ConfigError(f"c3 must be -1, 0 or 1, got {c3}")
        beta = p.beta if beta is None else beta
        h = c3 * (c3 - 1) / 2
        t2 = tau * tau * n1 * n1 * r1
        vals = (
            Y2 + r0 + beta ** 2 * n1 ** 2 * r1 + 2 * beta * n1 * r01,
            Y2 + r0 + c3 ** 2 * t2 * Y2 - 4 * c3 * tau * n1 * r01 * Y + 2 * h * t2 * Y2,
            Y2,
            Y * (Y - c3 * tau * n1 * r01 + h * t2 * Y),
            Y2 + r0 - 2 * c3 * tau * n1 * Y * r01 + h * t2 * Y2 + beta * n1 * r01
            - c3 * beta * tau * n1 ** 2 * r1 * Y,
        )
        return CoefficientSet("D", vals, {"tau": tau, "c3": c3, "beta": beta})
    raise ConfigError(f"unknown coefficient kind {kind!r}")


def mse_quadratic(cs: CoefficientSet, ybar_sq: float, w: float) -> float:
    """Evaluate the scalar quadratic MSE at ``w``.

    For kind A the bracket ``1 + ...`` is scaled by ``ybar_sq``; for B and C the
    constant term is ``ybar_sq`` itself.
    """
    if cs.kind == "D":
        raise ConfigError("D coefficients define a two-constant form; use mse_pair")
    v1, v2, v3, v4, v5 = cs.values
    q = w * w * v1 + (1 - w) ** 2 * v2 - 2 * w * v3 - 2 * (1 - w) * v4 + 2 * w * (1 - w) * v5
    if cs.kind == "A":
        return ybar_sq * (1 + q)
    return ybar_sq + q


def mse_pair(cs: CoefficientSet, ybar_sq: float, d1: float, d2: float) -> float:
    D1, D2, D3, D4, D5 = cs.values
    return ybar_sq + d1 * d1 * D1 + d2 * d2 * D2 - 2 * d1 * D3 - 2 * d2 * D4 + 2 * d1 * d2 * D5


def optimum_scalar(cs: CoefficientSet) -> float:
    """Stationary point ``(v2 + v3 - v4 - v5) / (v1 + v2 - 2 v5)`` of the scalar form."""
    v1, v2, v3, v4, v5 = cs.values
    den = v1 + v2 - 2 * v5
    if abs(den) <= FLAT_TOL * max(abs(v1), abs(v2), abs(v5), 1e-300):
        raise FlatObjectiveError(f"{cs.kind}: leading coefficient v1 + v2 - 2 v5 is {den:.3g}")
    if den < 0:
        raise NonConvexObjectiveError(f"{cs.kind}: leading coefficient v1 + v2 - 2 v5 is {den:.3g} < 0")
    return (v2 + v3 - v4 - v5) / den


def optimum_pair(cs: CoefficientSet) -> tuple[float, float]:
    D1, D2, D3, D4, D5 = cs.values
    det = D1 * D2 - D5 * D5
    if abs(det) <= FLAT_TOL * max(abs(D1 * D2), D5 * D5, 1e-300):
        raise SingularSystemError(f"D1*D2 - D5^2 = {det:.3g}; (d1, d2) not identified")
    if det < 0 or D1 < 0:
        raise NonConvexObjectiveError(f"D1 = {D1:.3g}, D1*D2 - D5^2 = {det:.3g}; stationary point is no minimum")
    return (D2 * D3 - D4 * D5) / det, (D1 * D4 - D3 * D5) / det


def phi_p_exact(cs: CoefficientSet) -> Fraction:
    """The gain term ``phi_p`` of the minimum ``Ybar^2 - phi_p``, in exact arithmetic.

    The sextic numerator over ``(D1 D2 - D5^2)^2`` cancels catastrophically in
    double precision, so it is evaluated on the exact rationals of the float
    coefficients.
    """
    D1, D2, D3, D4, D5 = (Fraction(v) for v in cs.values)
    num = (D1 * D2 ** 2 * D3 ** 2 - D1 * D4 ** 2 * D5 ** 2 + D1 ** 2 * D2 * D4 ** 2
           - D2 * D3 ** 2 * D5 ** 2 + 2 * D3 * D4 * D5 ** 3 - 2 * D1 * D2 * D3 * D4 * D5)
    det = D1 * D2 - D5 ** 2
    if det == 0:
        raise SingularSystemError("D1*D2 - D5^2 = 0")
    return num / det ** 2


def _crosscheck(label: str, evaluated: float, display: float) -> None:
    if abs(evaluated - display) > CROSSCHECK_RTOL * max(abs(evaluated), 1e-300):
        logger.warning("%s: closed-form minimum %.12g differs from evaluated quadratic %.12g",
                       label, display, evaluated)


def _ctx(p: PopulationParams, dc: DesignConstants | None) -> DesignConstants:
    return derive_constants(p) if dc is None else dc


def mean_per_unit_analytics(p: PopulationParams, dc: DesignConstants | None = None) -> AnalyticResult:
    dc = _ctx(p, dc)
    v = var_mean(dc, p)
    return AnalyticResult("ybar", 0.0, v, v)


def dual_ratio_analytics(p: PopulationParams, dc: DesignConstants | None = None) -> AnalyticResult:
    dc = _ctx(p, dc)
    m = mse_dual_ratio(dc, p, with_me=True)
    return AnalyticResult("e1", -dc.n1 * dc.r01 / p.mean_x, m, m)


def ratio_cum_dual_analytics(p: PopulationParams, dc: DesignConstants | None = None,
                             alpha: float | None = None, with_me: bool = True) -> AnalyticResult:
    """Ratio-cum-dual estimator; B coefficients with error, A coefficients without."""
    dc = _ctx(p, dc)
    cs = coeffs("B" if with_me else "A", dc, p)
    Y2 = p.mean_y ** 2
    a_opt = optimum_scalar(cs)
    a = a_opt if alpha is None else alpha
    mu, R, n1 = p.mean_x, dc.R, dc.n1
    if with_me:
        r1, r01 = dc.r1, dc.r01
    else:
        r1 = dc.gamma * p.var_x
        r01 = dc.r01
    bias = a * (R * r1 - r01) / mu - (1 - a) * n1 * r01 / mu
    return AnalyticResult("e2", bias, mse_quadratic(cs, Y2, a), mse_quadratic(cs, Y2, a_opt),
                          {"alpha": a_opt}, cs)


def wider_class_analytics(p: PopulationParams, dc: DesignConstants | None = None,
                          member: int | None = None, g1: float | None = None) -> AnalyticResult:
    """Wider (Srivastava-type) class in ``g(ybar, u**)``.

    MSE depends on the member only through the slope ``G1``; the bias needs the
    member's second-order derivatives, so it is reported only when ``member``
    is given (evaluated at the member's constant for the G1 in use).
    """
    dc = _ctx(p, dc)
    n1, mu, r0, r1, r01 = dc.n1, p.mean_x, dc.r0, dc.r1, dc.r01
    if r1 <= 0:
        raise ZeroR1Error("r1 = 0: auxiliary variable carries no sampling variation")
    g_opt = r01 * mu / (n1 * r1)
    g = g_opt if g1 is None else g1

    def mse(G):
        return r0 + (n1 ** 2 * r1 / mu ** 2) * G * G - (2 * n1 * r01 / mu) * G

    opt = {"G1": g_opt}
    bias = None
    name = "Y1"
    if member is not None:
        eps = member_constant_from_g1(member, g, p.mean_y)
        _, G2, G3, G4 = member_derivatives(member, eps, p.mean_y)
        bias = (n1 ** 2 * r1 / mu ** 2) * G2 - (n1 * r01 / mu) * G3 + r0 * G4
        opt["eps"] = member_constant_from_g1(member, g_opt, p.mean_y)
        name = f"Y1_{member}"
    min_mse = r0 - r01 ** 2 / r1
    _crosscheck("wider class", mse(g_opt), min_mse)
    return AnalyticResult(name, bias, mse(g), min_mse, opt)


def modified_difference_analytics(p: PopulationParams, dc: DesignConstants | None = None,
                                  J: float | None = None) -> AnalyticResult:
    dc = _ctx(p, dc)
    cs = coeffs("C", dc, p)
    Y = p.mean_y
    Y2 = Y * Y
    j_opt = optimum_scalar(cs)
    j = j_opt if J is None else J
    min_mse = mse_quadratic(cs, Y2, j_opt)
    C1, C2, C3, C4, C5 = cs.values
    phi2 = (C2 - 2 * C4) - (C2 + C3 - C4 - C5) ** 2 / (C1 + C2 - 2 * C5)
    _crosscheck("modified difference", min_mse, Y2 + phi2)
    lam = dc.lam
    bias = j * lam * (Y - dc.n1 * dc.r01 / p.mean_x) + (1 - j) * Y - Y
    return AnalyticResult("Y2", bias, mse_quadratic(cs, Y2, j), min_mse,
                          {"J": j_opt, "lambda": lam}, cs)


def diff_cum_dual_analytics(p: PopulationParams, tau: float, c3: int, beta: float | None = None,
                            dc: DesignConstants | None = None,
                            d: tuple[float, float] | None = None, name: str = "Yp") -> AnalyticResult:
    """Difference-cum-dual class with ratio exponent ``c3`` and ``tau = c1/(c1 mu_x + c2)``.

    The minimum is the quadratic evaluated at the solved (d1, d2); the
    closed-form ``Ybar^2 - phi_p`` is computed alongside as an audit.
    """
    dc = _ctx(p, dc)
    cs = coeffs("D", dc, p, tau=tau, c3=c3, beta=beta)
    Y = p.mean_y
    Y2 = Y * Y
    d1o, d2o = optimum_pair(cs)
    d1, d2 = (d1o, d2o) if d is None else d
    # terms of size d^2 * D dwarf the minimum, so sum them exactly
    exact = CoefficientSet("D", tuple(Fraction(v) for v in cs.values), cs.context)
    min_mse = float(mse_pair(exact, Fraction(Y2), Fraction(d1o), Fraction(d2o)))
    _crosscheck(name, min_mse, float(Fraction(Y2) - phi_p_exact(cs)))
    h = c3 * (c3 - 1) / 2
    n1, r1, r01 = dc.n1, dc.r1, dc.r01
    bias = d1 * Y + d2 * (Y - c3 * tau * n1 * r01 + h * tau ** 2 * n1 ** 2 * r1 * Y) - Y
    return AnalyticResult(name, bias, mse_pair(cs, Y2, d1, d2), min_mse,
                          {"d1": d1o, "d2": d2o}, cs)


def named_member_analytics(member: str, p: PopulationParams, dc: DesignConstants | None = None,
                       beta: float | None = None) -> AnalyticResult:
    """Analytics for a named member ``yp1``..``yp7`` (case-insensitive)."""
    key = member.lower()
    if key not in NAMED_MEMBERS:
        raise ConfigError(f"unknown named member {member!r}")
    dc = _ctx(p, dc)
    c1, c2, c3 = named_member_constants(key, p.mean_x, dc.cx, p.rho)
    den = c1 * p.mean_x + c2
    if den == 0:
        raise SingularTauError(0, f"{key}: c1*mu_x + c2 vanishes")
    tau = c1 / den
    r = diff_cum_dual_analytics(p, tau, c3, beta=beta, dc=dc, name="Yp" + key[2:])
    r.optimum_constants.update(c1=c1, c2=c2, c3=c3)
    return r


def pre(var_base: float, mse_min: float) -> float:
    """Percent relative efficiency ``100 * var_base / mse_min``."""
    if not mse_min > 0:
        raise NonPositiveMSEError(f"PRE needs a positive MSE, got {mse_min}")
    return 100.0 * var_base / mse_min


def analyze(p: PopulationParams, strict: bool = True) -> list[AnalyticResult]:
    """Every estimator in the comparison table, at its optimum constants.

    With ``strict=False`` a row whose optimum is singular comes back with
    ``status`` naming the error and ``None`` values instead of raising. A row
    whose first-order minimum is not positive (possible for the truncated
    difference-cum-dual moments) keeps its values but is flagged the same way.
    """
    dc = derive_constants(p)
    rows = [
        ("ybar", lambda: mean_per_unit_analytics(p, dc)),
        ("e1", lambda: dual_ratio_analytics(p, dc)),
        ("e2", lambda: ratio_cum_dual_analytics(p, dc)),
        ("Y1", lambda: wider_class_analytics(p, dc)),
        ("Y2", lambda: modified_difference_analytics(p, dc)),
    ]
    rows += [(f"Yp{i}", lambda i=i: named_member_analytics(f"yp{i}", p, dc)) for i in range(1, 8)]
    out = []
    for name, fn in rows:
        try:
            r = fn()
            if not r.min_mse > 0:
                raise NonPositiveMSEError(f"{name}: first-order minimum MSE is {r.min_mse:.6g}")
            out.append(r)
        except NonPositiveMSEError as exc:
            if strict:
                raise
            r.status = f"{type(exc).__name__}: {exc}"
            out.append(r)
        except SingularityError as exc:
            if strict:
                raise
            out.append(AnalyticResult(name, None, None, None, status=f"{type(exc).__name__}: {exc}"))
    return out


@dataclass(frozen=True)
class Condition:
    """One efficiency condition: does ``candidate`` beat ``reference``?

    ``lhs`` is the displayed inequality's left-hand side, which the condition
    wants ``<= 0`` or ``>= 0`` (``sense``). ``holds`` is the strict version;
    ``boundary`` marks a left-hand side within round-off of zero. When an
    ingredient is singular, ``status`` says so and the numbers are ``None``.
    """

    name: str
    candidate: str
    reference: str
    lhs: float | None
    sense: str
    holds: bool
    boundary: bool
    mse_candidate: float | None
    mse_reference: float | None
    direct: bool
    status: str = "ok"

    @property
    def agrees(self) -> bool:
        return self.holds == self.direct

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["agrees"] = self.agrees
        return d


def efficiency_conditions(p: PopulationParams, results: dict[str, AnalyticResult] | None = None,
                          dc: DesignConstants | None = None, yp_member: str = "Yp1",
                          rtol: float = 1e-10) -> list[Condition]:
    """Seven pairwise efficiency conditions for the adapted classes.

    The left-hand sides are built from the textbook displays (coefficients of
    variation, phi terms), independently of ``results``, whose ``min_mse``
    values give the direct comparison each condition is checked against.
    """
    dc = _ctx(p, dc)
    if results is None:
        results = {r.name: r for r in analyze(p, strict=False)}
    g, n1, R = dc.gamma, dc.n1, dc.R
    Y = p.mean_y
    Y2 = Y * Y
    cy, cx, rho = dc.cy, dc.cx, p.rho

    def y1():
        if dc.r1 <= 0:
            raise ZeroR1Error("r1 = 0")
        return dc.r0 - dc.r01 ** 2 / dc.r1

    def y2():
        C1, C2, C3, C4, C5 = coeffs("C", dc, p).values
        den = C1 + C2 - 2 * C5
        if den == 0:
            raise FlatObjectiveError("C1 + C2 - 2 C5 = 0")
        return Y2 + (C2 - 2 * C4) - (C2 + C3 - C4 - C5) ** 2 / den

    def yp():
        r = results.get(yp_member)
        if r is None or not r.ok:
            raise SingularSystemError(f"{yp_member} unavailable")
        return float(Fraction(Y2) - phi_p_exact(r.coefficients))

    def e2():
        Bcs = coeffs("B", dc, p)
        return mse_quadratic(Bcs, Y2, optimum_scalar(Bcs))

    disp = {
        "ybar": lambda: g * Y2 * (cy ** 2 + p.var_ey / Y2),
        "e1": lambda: (g * Y2 * (cy ** 2 + n1 ** 2 * cx ** 2 - 2 * n1 * rho * cy * cx)
                       + g * (p.var_ey + n1 ** 2 * R ** 2 * p.var_ex)),
        "e2": e2,
        "Y1": y1,
        "Y2": y2,
        yp_member: yp,
    }
    # (name, candidate, reference, sense); lhs = cand - ref for "<=0", ref - cand for ">=0"
    specs = [
        ("Y1_vs_ybar", "Y1", "ybar", "<=0"),
        ("Y2_vs_ybar", "Y2", "ybar", ">=0"),
        ("Y1_vs_e1", "Y1", "e1", ">=0"),
        ("Y2_vs_e1", "Y2", "e1", ">=0"),
        ("Yp_vs_ybar", yp_member, "ybar", "<=0"),
        ("Yp_vs_e1", yp_member, "e1", ">=0"),
        ("Yp_vs_e2", yp_member, "e2", ">=0"),
    ]
    out = []
    for name, cand, ref, sense in specs:
        rc, rr = results.get(cand), results.get(ref)
        try:
            if rc is None or not rc.ok or rr is None or not rr.ok:
                bad = cand if rc is None or not rc.ok else ref
                raise SingularityError(f"{bad} has no analytic minimum")
            a, b = disp[cand](), disp[ref]()
        except SingularityError as exc:
            out.append(Condition(name, cand, ref, None, sense, False, False,
                                 rc.min_mse if rc is not None else None,
                                 rr.min_mse if rr is not None else None, False,
                                 status=f"undefined: {exc}"))
            continue
        lhs = a - b if sense == "<=0" else b - a
        mc, mr = rc.min_mse, rr.min_mse
        tol = rtol * max(abs(mc), abs(mr), 1e-300)
        boundary = abs(lhs) <= tol
        holds = (lhs < -tol) if sense == "<=0" else (lhs > tol)
        direct = mr - mc > tol
        out.append(Condition(name, cand, ref, lhs, sense, holds, boundary, mc, mr, direct,
                             status="boundary" if boundary else "ok"))
    return out
