"""
First-order MSE table for the three parameter presets
=====================================================

Every estimator's minimum MSE and its efficiency relative to the sample mean,
next to the reference values. The reference parameter list for population I
carries the X error variance of population II (24.19); with the value implied
by its own generator (9) every row lines up.
"""

from dualme import REFERENCE_TABLE, PARAM_PRESETS, analyze, pre

for preset, column in (("pop1", "pop1"), ("pop1-corrected", "pop1"), ("pop2", "pop2")):
    p = PARAM_PRESETS[preset]
    rows = analyze(p, strict=False)
    base = rows[0].min_mse
    print(f"\n{preset}  (var_ex = {p.var_ex})")
    print(f"{'row':>5} {'MSE':>10} {'PRE':>9} {'reference MSE':>14} {'rel diff':>9}")
    for r in rows:
        ref = REFERENCE_TABLE[r.name][column][1]
        print(f"{r.name:>5} {r.min_mse:10.6f} {pre(base, r.min_mse):9.3f} {ref:14.6f} "
              f"{(r.min_mse - ref) / ref:+9.2%}")

# the optimum constants behind one row
yp2 = {r.name: r for r in analyze(PARAM_PRESETS["pop2"])}["Yp2"]
print("\nYp2 optimum on pop2:", {k: round(v, 4) for k, v in yp2.optimum_constants.items()})
