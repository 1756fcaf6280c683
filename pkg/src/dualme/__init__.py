"""Mean estimation with dual-to-ratio and difference-type estimators under measurement error."""

from .analytics import (
    AnalyticResult,
    CoefficientSet,
    Condition,
    analyze,
    coeffs,
    diff_cum_dual_analytics,
    efficiency_conditions,
    mean_per_unit_analytics,
    dual_ratio_analytics,
    modified_difference_analytics,
    mse_dual_ratio,
    mse_pair,
    mse_quadratic,
    optimum_pair,
    optimum_scalar,
    pre,
    ratio_cum_dual_analytics,
    named_member_analytics,
    var_mean,
    wider_class_analytics,
)
from .constants import DesignConstants, PopulationParams, derive_constants
from .errors import *  # noqa: F401,F403
from .estimators import (
    EstimatorSpec,
    ObservedSample,
    dual_transform,
    estimate,
    member_constant_from_g1,
    point_estimate,
    sample_means,
    tau_values,
)
from .presets import PARAM_PRESETS, POPULATION_PRESETS, REFERENCE_TABLE, get_params, get_population_spec
from .simulation import (
    GeneratedPopulation,
    MonteCarloConfig,
    MonteCarloResult,
    SyntheticPopulationSpec,
    draw_srswor,
    generate_population,
    observe_with_error,
    optimal_estimators,
    run_monte_carlo,
)

__version__ = "0.1.0"
