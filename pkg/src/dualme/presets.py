"""Named parameter sets, synthetic population generators and the reference comparison table."""

from __future__ import annotations

from .constants import PopulationParams
from .errors import ConfigError
from .simulation import SyntheticPopulationSpec

__all__ = ["PARAM_PRESETS", "POPULATION_PRESETS", "REFERENCE_TABLE", "get_params", "get_population_spec"]

_POP1 = dict(N=5000, n=500, mean_y=4.927167, mean_x=4.924306, var_y=102.0075, var_x=101.4117,
             var_ey=8.862114, var_ex=24.19283, rho=0.995059)
_POP2 = dict(N=5000, n=500, mean_y=4.996681, mean_x=5.013507, var_y=97.12064, var_x=95.95803,
             var_ey=23.96055, var_ex=24.19283, rho=0.994822)

PARAM_PRESETS: dict[str, PopulationParams] = {
    # reference list; var_ex duplicates population 2's value
    "pop1": PopulationParams(**_POP1),
    # var_ex = 3^2, consistent with x = X + N(1, 3); reproduces every reference row
    "pop1-corrected": PopulationParams(**{**_POP1, "var_ex": 9.0}),
    "pop2": PopulationParams(**_POP2),
}

POPULATION_PRESETS: dict[str, SyntheticPopulationSpec] = {
    "pop1": SyntheticPopulationSpec(N=5000, x_mean=5.0, x_sd=10.0, y_noise_sd=1.0,
                                    err_y_mean=1.0, err_y_sd=3.0, err_x_mean=1.0, err_x_sd=3.0, seed=1),
    "pop2": SyntheticPopulationSpec(N=5000, x_mean=5.0, x_sd=10.0, y_noise_sd=1.0,
                                    err_y_mean=1.0, err_y_sd=5.0, err_x_mean=1.0, err_x_sd=5.0, seed=2),
}

# Reference (PRE, MSE) per estimator row, for populations I and II.
REFERENCE_TABLE: dict[str, dict[str, tuple[float, float]]] = {
    "ybar": {"pop1": (100.0, 0.19956), "pop2": (100.0, 0.217946)},
    "e1": {"pop1": (123.56, 0.16151), "pop2": (119.55, 0.182305)},
    "e2": {"pop1": (612.48, 0.03258), "pop2": (273.214, 0.079771)},
    "Y1": {"pop1": (612.48, 0.03258), "pop2": (273.214, 0.079771)},
    "Y2": {"pop1": (611.66, 0.03263), "pop2": (273.2932, 0.079748)},
    "Yp1": {"pop1": (618.29, 0.032276), "pop2": (273.2585, 0.079758)},
    "Yp2": {"pop1": (940.53, 0.021218), "pop2": (315.404, 0.069101)},
    "Yp3": {"pop1": (959.49, 0.020799), "pop2": (302.231, 0.072112)},
    "Yp4": {"pop1": (834.3038, 0.02392), "pop2": (288.736, 0.075483)},
    "Yp5": {"pop1": (822.301, 0.024269), "pop2": (298.442, 0.073028)},
    "Yp6": {"pop1": (945.54, 0.021106), "pop2": (315.8539, 0.069)},
    "Yp7": {"pop1": (964.96, 0.020681), "pop2": (302.6126, 0.072021)},
}


def get_params(name: str) -> PopulationParams:
    try:
        return PARAM_PRESETS[name]
    except KeyError:
        raise ConfigError(f"preset: unknown parameter preset {name!r} "
                          f"(choose from {', '.join(PARAM_PRESETS)})") from None


def get_population_spec(name: str) -> SyntheticPopulationSpec:
    try:
        return POPULATION_PRESETS[name]
    except KeyError:
        raise ConfigError(f"preset: unknown population preset {name!r} "
                          f"(choose from {', '.join(POPULATION_PRESETS)})") from None
