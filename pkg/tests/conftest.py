import math

import pytest
from hypothesis import strategies as st

from dualme import PARAM_PRESETS, PopulationParams


@pytest.fixture(params=["pop1", "pop1-corrected", "pop2"])
def preset(request):
    return PARAM_PRESETS[request.param]


@st.composite
def population_params(draw, min_abs_rho=0.0, errors=True):
    """Random valid parameter sets with moderate magnitudes."""
    N = draw(st.integers(20, 20000))
    n = draw(st.integers(2, N - 1))
    sign = draw(st.sampled_from([-1.0, 1.0]))
    mean_y = sign * draw(st.floats(0.5, 50.0))
    mean_x = draw(st.sampled_from([-1.0, 1.0])) * draw(st.floats(0.5, 50.0))
    var_y = draw(st.floats(0.1, 200.0))
    var_x = draw(st.floats(0.1, 200.0))
    if errors:
        var_ey = draw(st.floats(0.0, 50.0))
        var_ex = draw(st.floats(0.0, 50.0))
    else:
        var_ey = var_ex = 0.0
    rho = draw(st.floats(-1.0, 1.0).filter(lambda r: abs(r) >= min_abs_rho))
    return PopulationParams(N=N, n=n, mean_y=mean_y, mean_x=mean_x, var_y=var_y, var_x=var_x,
                            var_ey=var_ey, var_ex=var_ex, rho=rho)


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def isclose(a, b, rtol):
    return math.isclose(a, b, rel_tol=rtol, abs_tol=0.0)
