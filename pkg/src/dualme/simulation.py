"""Synthetic populations, SRSWOR draws with measurement error, and a Monte Carlo harness.

Each replication gets its own counter-based Philox stream keyed by
``(master_seed, replication index)``, so results do not depend on execution
order or on the number of worker threads.

Two error modes are supported. ``error_means_zeroed=True`` (the default)
matches the assumptions behind the analytic MSEs: errors have mean zero over
the finite population, which makes the error part of Var(ybar) exactly
``gamma * S_d^2``. It is simulated by drawing a fresh error for every unit
and centring the whole population's errors; only the sampled errors and the
sum of the unsampled ones are needed, so the N - n unsampled errors are
collapsed into a single normal draw. ``error_means_zeroed=False`` draws
independent ``Normal(err_mean, err_sd)`` errors for the sampled units only,
reproducing the populations as literally described.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import analytics as an
from .constants import PopulationParams, derive_constants
from .errors import ConfigError, DegeneratePopulationError, MonteCarloFailure
from .estimators import (
    NAMED_MEMBERS,
    EstimatorSpec,
    ObservedSample,
    member_constant_from_g1,
    member_derivatives,
    point_estimate,
    named_member_constants,
)

__all__ = [
    "SyntheticPopulationSpec",
    "GeneratedPopulation",
    "MonteCarloConfig",
    "EstimatorStats",
    "MonteCarloResult",
    "generate_population",
    "replication_rng",
    "draw_srswor",
    "observe_with_error",
    "optimal_estimators",
    "analytic_mse_for",
    "simulate_means",
    "run_monte_carlo",
    "MAX_FLAGGED_FRACTION",
]

MAX_FLAGGED_FRACTION = 0.001


@dataclass(frozen=True)
class SyntheticPopulationSpec:
    """Normal population generator: ``X ~ N(x_mean, x_sd)``, ``Y = X + N(0, y_noise_sd)``.

    Normal parameters are (mean, standard deviation). ``n`` is the design
    sample size used for the realised :class:`PopulationParams`.
    """

    N: int = 5000
    x_mean: float = 5.0
    x_sd: float = 10.0
    y_noise_sd: float = 1.0
    err_y_mean: float = 1.0
    err_y_sd: float = 3.0
    err_x_mean: float = 1.0
    err_x_sd: float = 3.0
    seed: int = 0
    n: int = 500

    def __post_init__(self):
        if self.N < 2:
            raise ConfigError(f"N: must be at least 2, got {self.N}")
        for name in ("x_sd", "y_noise_sd", "err_y_sd", "err_x_sd"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name}: must be nonnegative")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed: must be an unsigned 64-bit integer")

    @classmethod
    def from_dict(cls, d: dict) -> SyntheticPopulationSpec:
        names = {f.name for f in fields(cls)}
        extra = sorted(set(d) - names)
        if extra:
            raise ConfigError(f"unknown field(s): {', '.join(extra)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class GeneratedPopulation:
    spec: SyntheticPopulationSpec
    true_x: np.ndarray
    true_y: np.ndarray
    moments: dict

    def params(self, n: int | None = None) -> PopulationParams:
        """Realised :class:`PopulationParams` for sample size ``n`` (default ``spec.n``)."""
        m = dict(self.moments)
        return PopulationParams(n=self.spec.n if n is None else n, **m)

    @property
    def realized_params(self) -> PopulationParams:
        return self.params()

    @property
    def N(self) -> int:
        return len(self.true_x)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["true_x", "true_y"])
        for x, y in zip(self.true_x.tolist(), self.true_y.tolist()):
            w.writerow([repr(x), repr(y)])
        return buf.getvalue()

    def sidecar(self) -> dict:
        """JSON-ready realised moments, plus the full parameter set when it is valid."""
        out = {"spec": self.spec.to_dict(), "moments": dict(self.moments)}
        try:
            out["realized_params"] = self.params().to_dict()
        except ConfigError as exc:
            out["realized_params"] = None
            out["note"] = str(exc)
        return out


def generate_population(spec: SyntheticPopulationSpec) -> GeneratedPopulation:
    """Draw a finite population deterministically from ``spec.seed``.

    Moments use divisor ``N - 1``; the error variances are the generator's
    ``err_sd**2`` (known by construction).
    """
    if spec.x_sd == 0:
        raise DegeneratePopulationError("x_sd = 0: S_X^2 = 0 and rho is undefined")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(spec.seed)))
    x = rng.normal(spec.x_mean, spec.x_sd, spec.N)
    y = x + rng.normal(0.0, spec.y_noise_sd, spec.N)
    vx = float(np.var(x, ddof=1))
    vy = float(np.var(y, ddof=1))
    if vx == 0:
        raise DegeneratePopulationError("generated X has no spread")
    rho = float(np.sum((x - x.mean()) * (y - y.mean())) / (spec.N - 1) / math.sqrt(vx * vy)) if vy > 0 else 0.0
    moments = {
        "N": spec.N,
        "mean_y": float(np.mean(y)),
        "mean_x": float(np.mean(x)),
        "var_y": vy,
        "var_x": vx,
        "var_ey": spec.err_y_sd ** 2,
        "var_ex": spec.err_x_sd ** 2,
        "rho": max(-1.0, min(1.0, rho)),
    }
    return GeneratedPopulation(spec, x, y, moments)


def replication_rng(master_seed: int, index: int) -> np.random.Generator:
    """Independent counter-based stream for replication ``index``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(master_seed, spawn_key=(index,))))


def draw_srswor(pop: GeneratedPopulation | int, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` distinct unit indices drawn uniformly without replacement."""
    N = pop if isinstance(pop, (int, np.integer)) else pop.N
    if n > N:
        raise ConfigError(f"cannot draw n={n} units from N={N}")
    if n < 0:
        raise ConfigError("n must be nonnegative")
    return rng.choice(N, size=n, replace=False)


def _errors(rng, n, N, mean, sd, zeroed):
    if zeroed:
        e = rng.normal(0.0, sd, n)
        rest = rng.normal(0.0, sd * math.sqrt(N - n)) if N > n else 0.0
        return e - (e.sum() + rest) / N
    return rng.normal(mean, sd, n)


def observe_with_error(pop: GeneratedPopulation, indices: np.ndarray, rng: np.random.Generator,
                       error_means_zeroed: bool = True) -> ObservedSample:
    """Observed values ``true + error`` for the sampled units.

    Y errors are drawn before X errors; the two are independent.
    """
    s = pop.spec
    N, n = pop.N, len(indices)
    ey = _errors(rng, n, N, s.err_y_mean, s.err_y_sd, error_means_zeroed)
    ex = _errors(rng, n, N, s.err_x_mean, s.err_x_sd, error_means_zeroed)
    return ObservedSample(pop.true_x[indices] + ex, pop.true_y[indices] + ey, N)


def _one_replication(pop, n, master_seed, index, zeroed):
    rng = replication_rng(master_seed, index)
    s = observe_with_error(pop, draw_srswor(pop, n, rng), rng, zeroed)
    return s.xs.mean(), s.ys.mean()


def simulate_means(pop: GeneratedPopulation, n: int, replications: int, master_seed: int,
                   error_means_zeroed: bool = True, workers: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Sample means ``(xbar, ybar)`` for each replication, in replication order."""
    if not 2 <= n < pop.N:
        raise ConfigError(f"n: need 2 <= n < N, got n={n}, N={pop.N}")
    xbar = np.empty(replications)
    ybar = np.empty(replications)

    def work(lo, hi):
        for i in range(lo, hi):
            xbar[i], ybar[i] = _one_replication(pop, n, master_seed, i, error_means_zeroed)

    if workers <= 1:
        work(0, replications)
    else:
        step = max(1, -(-replications // (4 * workers)))
        with ThreadPoolExecutor(max_workers=workers) as ex:
            list(ex.map(lambda lo: work(lo, min(lo + step, replications)), range(0, replications, step)))
    return xbar, ybar


def optimal_estimators(p: PopulationParams, names=None) -> dict[str, EstimatorSpec]:
    """Estimator specs with constants at their analytic optima for ``p``.

    Recognised names: ``ybar``, ``e1``, ``e2``, ``Y1_1``..``Y1_4``, ``Y2`` and
    ``Yp1``..``Yp7``.
    """
    dc = derive_constants(p)
    mu = p.mean_x
    all_names = ["ybar", "e1", "e2", "Y1_1", "Y1_2", "Y1_3", "Y1_4", "Y2"] + [f"Yp{i}" for i in range(1, 8)]
    names = all_names if names is None else list(names)
    out = {}
    for nm in names:
        if nm == "ybar":
            spec = EstimatorSpec("MeanPerUnit", mu, name=nm)
        elif nm == "e1":
            spec = EstimatorSpec("DualRatio", mu, name=nm)
        elif nm == "e2":
            a = an.ratio_cum_dual_analytics(p, dc).optimum_constants["alpha"]
            spec = EstimatorSpec("RatioCumDual", mu, {"alpha": a}, name=nm)
        elif nm.startswith("Y1_"):
            k = int(nm[3:])
            g1 = an.wider_class_analytics(p, dc).optimum_constants["G1"]
            spec = EstimatorSpec("WiderMember", mu, {"k": k, "eps": member_constant_from_g1(k, g1, p.mean_y)},
                                 name=nm)
        elif nm == "Y2":
            r = an.modified_difference_analytics(p, dc)
            spec = EstimatorSpec("ModifiedDifference", mu, {"J": r.optimum_constants["J"]}, lam=dc.lam, name=nm)
        elif nm.lower() in NAMED_MEMBERS:
            key = nm.lower()
            r = an.named_member_analytics(key, p, dc)
            c1, c2, c3 = named_member_constants(key, mu, dc.cx, p.rho)
            spec = EstimatorSpec("DiffCumDual", mu,
                                 {"d1": r.optimum_constants["d1"], "d2": r.optimum_constants["d2"],
                                  "c1": c1, "c2": c2, "c3": c3},
                                 beta=p.beta, name=nm)
        else:
            raise ConfigError(f"unknown estimator name {nm!r}")
        out[nm] = spec
    return out


def analytic_mse_for(spec: EstimatorSpec, p: PopulationParams) -> float:
    """First-order MSE of ``spec`` at its own constants."""
    dc = derive_constants(p)
    c = spec.constants
    fam = spec.family
    if fam == "MeanPerUnit":
        return an.var_mean(dc, p)
    if fam == "DualRatio":
        return an.mse_dual_ratio(dc, p)
    if fam == "RatioCumDual":
        return an.mse_quadratic(an.coeffs("B", dc, p), p.mean_y ** 2, c["alpha"])
    if fam == "WiderMember":
        g1 = member_derivatives(int(c["k"]), c["eps"], p.mean_y)[0]
        return an.wider_class_analytics(p, dc, g1=g1).mse
    if fam == "ModifiedDifference":
        return an.mse_quadratic(an.coeffs("C", dc, p, lam=spec.lam), p.mean_y ** 2, c["J"])
    cs = an.coeffs("D", dc, p, tau=spec.tau, c3=int(c["c3"]), beta=spec.beta)
    return an.mse_pair(cs, p.mean_y ** 2, c["d1"], c["d2"])


@dataclass(frozen=True)
class MonteCarloConfig:
    replications: int = 20000
    n: int = 500
    estimators: tuple = ()
    master_seed: int = 20240601
    error_means_zeroed: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigError("replications: must be at least 1")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ConfigError("master_seed: must be an unsigned 64-bit integer")
        object.__setattr__(self, "estimators", tuple(self.estimators))

    @classmethod
    def from_dict(cls, d: dict) -> MonteCarloConfig:
        names = {f.name for f in fields(cls)}
        extra = sorted(set(d) - names)
        if extra:
            raise ConfigError(f"unknown field(s): {', '.join(extra)}")
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["estimators"] = [e.to_dict() if isinstance(e, EstimatorSpec) else e for e in self.estimators]
        d.pop("workers")
        return d


@dataclass(frozen=True)
class EstimatorStats:
    name: str
    empirical_bias: float
    empirical_mse: float
    monte_carlo_se: float
    analytic_mse: float
    flagged: int
    spec: EstimatorSpec

    @property
    def ratio(self) -> float:
        return self.empirical_mse / self.analytic_mse if self.analytic_mse else math.nan


@dataclass
class MonteCarloResult:
    target: float
    replications: int
    stats: dict[str, EstimatorStats]
    config: MonteCarloConfig
    population: dict = field(default_factory=dict)

    def __getitem__(self, name: str) -> EstimatorStats:
        return self.stats[name]

    def to_dict(self) -> dict:
        return {
            "target_mean_y": self.target,
            "replications": self.replications,
            "config": self.config.to_dict(),
            "population": self.population,
            "estimators": [
                {
                    "estimator": s.name,
                    "empirical_bias": s.empirical_bias,
                    "empirical_mse": s.empirical_mse,
                    "monte_carlo_se": s.monte_carlo_se,
                    "analytic_mse": s.analytic_mse,
                    "ratio": s.ratio,
                    "flagged": s.flagged,
                    "spec": s.spec.to_dict(),
                }
                for s in self.stats.values()
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)


def _resolve(cfg: MonteCarloConfig, p: PopulationParams) -> dict[str, EstimatorSpec]:
    if not cfg.estimators:
        return optimal_estimators(p)
    out = {}
    names = [e for e in cfg.estimators if isinstance(e, str)]
    opt = optimal_estimators(p, names) if names else {}
    for e in cfg.estimators:
        if isinstance(e, str):
            out[e] = opt[e]
        elif isinstance(e, EstimatorSpec):
            out[e.name or f"est{len(out)}"] = e
        else:
            spec = EstimatorSpec.from_dict(e, params=p)
            out[spec.name or f"est{len(out)}"] = spec
    return out


def run_monte_carlo(pop: GeneratedPopulation, cfg: MonteCarloConfig) -> MonteCarloResult:
    """Empirical bias and MSE of each estimator over ``cfg.replications`` samples.

    Estimator constants are fixed once from the population's realised
    parameters. Replications with a non-finite estimate are excluded from the
    moments and counted; more than 0.1% of them raises
    :class:`MonteCarloFailure` (the partial result is attached).
    """
    p = pop.params(cfg.n)
    specs = _resolve(cfg, p)
    xbar, ybar = simulate_means(pop, cfg.n, cfg.replications, cfg.master_seed,
                                cfg.error_means_zeroed, cfg.workers)
    target = p.mean_y
    stats = {}
    worst = 0
    for name, spec in specs.items():
        est = np.asarray(point_estimate(spec, xbar, ybar, pop.N, cfg.n), dtype=float)
        ok = np.isfinite(est)
        flagged = int(est.size - ok.sum())
        worst = max(worst, flagged)
        dev = est[ok] - target
        k = dev.size
        sq = dev * dev
        mse = float(np.mean(sq)) if k else math.nan
        se = float(np.std(sq, ddof=1) / math.sqrt(k)) if k >= 2 else math.nan
        stats[name] = EstimatorStats(name, float(np.mean(dev)) if k else math.nan, mse, se,
                                     analytic_mse_for(spec, p), flagged, spec)
    result = MonteCarloResult(target, cfg.replications, stats, cfg,
                              {"spec": pop.spec.to_dict(), "realized_params": p.to_dict()})
    if worst > MAX_FLAGGED_FRACTION * cfg.replications:
        raise MonteCarloFailure(
            f"{worst} of {cfg.replications} replications gave non-finite estimates "
            f"(limit {MAX_FLAGGED_FRACTION:.1%})", result)
    return result
