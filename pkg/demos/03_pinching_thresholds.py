"""
Pinching thresholds L_H and M_H
===============================

L_H and M_H are the positive roots of two quadratics in t.  This script
tabulates them, checks the defining polynomials, compares with the closed
forms printed as remarks, and runs the hypothesis classifier on three
model surfaces.
"""

import math

from cmclab import catalog, thresholds
from cmclab.thresholds import SurfaceInvariants

print(f"H* = sqrt((12 + sqrt(176))/16) = {thresholds.H_STAR:.12f}\n")
print(f"{'H':>6} {'L_H':>18} {'|p_H(L_H)|':>11} {'M_H':>18} {'|q_H(M_H)|':>11}")
for row in thresholds.roots_table([0.5, 0.75, 1.0, 1.25664, 1.5, 2.0, 3.0]):
    fmt = lambda v, spec: "n/a" if v is None else format(v, spec)  # noqa: E731
    print(f"{row['H']:6.4g} {fmt(row['L_H'], '.15f'):>18} {fmt(row['p_residual'], '.1e'):>11} "
          f"{fmt(row['M_H'], '.15f'):>18} {fmt(row['q_residual'], '.1e'):>11}")

# The remark's expression for L_H has the wrong sign in a denominator.
print(f"\nH = 1: root L_H = {thresholds.L_H(1.0):.10f}, remark expression = {thresholds.L_H_remark(1.0):.10f}")
print(f"H = 2: root M_H = {thresholds.M_H(2.0):.10f}, remark expression = {thresholds.M_H_remark(2.0):.10f}")

# Classification: hypotheses only; completeness and closedness are declared.
cases = [
    ("sphere S^2xR, H=1", catalog.make_rotational_cmc_sphere(1, 1.0, nx=17, ny=16), 1, "L_pinching_complete_S2xR"),
    ("cylinder, H=1", catalog.make_cmc_cylinder(1.0, catalog.default_domain("cmc_cylinder", 16, 9)), 1,
     "L_pinching_complete_S2xR"),
    ("vertical plane", catalog.make_vertical_plane(catalog.default_domain("vertical_plane", 9, 9)), -1,
     "minimal_pinching_H2xR"),
]
print()
for name, grid, c, theorem in cases:
    inv = SurfaceInvariants.from_shape(grid.shape)
    t = thresholds.classify(inv, c, complete=True).verdict(theorem)
    margin = ", ".join(f"{k} = {v:.4g}" for k, v in t.margins.items())
    print(f"{name:20s} {theorem:26s} {t.verdict:22s} ({margin}) -> {t.conclusion}")
print(f"\nsqrt2/2 (4H^2+1) at H = 1: {math.sqrt(2) / 2 * 5:.6f} > L_1")
