"""
When does one estimator beat another?
=====================================

Each pairwise condition is a sign test on a closed-form display. Here we check
them against the direct MSE comparison, then walk the correlation down to zero
to see where the gains disappear.
"""

from dataclasses import replace

import numpy as np

from dualme import PARAM_PRESETS, efficiency_conditions

p = PARAM_PRESETS["pop2"]
for c in efficiency_conditions(p):
    print(f"{c.name:>11}  lhs {c.lhs:+.3e} {c.sense:>4}  holds={c.holds!s:5}  agrees={c.agrees}")

# without measurement error the wider class gains over ybar only through rho
base = replace(p, var_ey=0.0, var_ex=0.0)
print("\nrho   Y1_vs_ybar lhs   status")
for rho in np.linspace(0.6, 0.0, 4):
    c = efficiency_conditions(replace(base, rho=float(rho)))[0]
    print(f"{rho:.2f}  {c.lhs:+.3e}      {c.status}")
