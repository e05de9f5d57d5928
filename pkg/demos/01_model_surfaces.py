"""
Model surfaces and their shape operators
========================================

Builds the catalog surfaces on small grids and prints the quantities that
have closed forms: the mean curvature, the angle function nu = <N, d_t>,
and the norm of the traceless operator S.
"""

import math

import numpy as np

from cmclab import catalog

# A horizontal slice is totally geodesic: nothing bends, so A = 0 and S = 0.
sl = catalog.make_slice(1, 0.3, catalog.default_domain("slice", 9, 9))
print("slice            H = %.3g   nu^2 = %.3g   |S| = %.3g"
      % (np.max(np.abs(sl.shape.H)), np.min(sl.shape.nu**2), np.max(np.sqrt(sl.shape.S_abs2))))

# Vertical cylinders over circles of S^2: the circle of geodesic curvature 2H
# gives a surface of mean curvature H.  S has the eigenvalues +-(2H^2 + 1/2).
for H in (0.6, 1.0, 2.0):
    cyl = catalog.make_cmc_cylinder(H, catalog.default_domain("cmc_cylinder", 16, 9))
    S = cyl.shape.in_frame(cyl.shape.S)[0, 4]
    print(f"cylinder H={H:<4} S = diag({S[0, 0]:+.6f}, {S[1, 1]:+.6f})   "
          f"|S| = {np.sqrt(cyl.shape.S_abs2[0, 4]):.6f}   (sqrt2/2)(4H^2+1) = {math.sqrt(2) / 2 * (4 * H * H + 1):.6f}")

# The vertical plane over a geodesic of H^2 is minimal, yet |S|^2 = 1/2.
vp = catalog.make_vertical_plane(catalog.default_domain("vertical_plane", 9, 9))
print("vertical plane   H = %.3g   |S|^2 = %.6f" % (np.max(np.abs(vp.shape.H)), vp.shape.S_abs2.mean()))

# Rotational spheres come from shooting the profile ODE off the axis.  The
# construction is accepted only if shape_data recomputes a constant H.
for c in (1, -1):
    sph = catalog.make_rotational_cmc_sphere(c, 1.0, nx=17, ny=16)
    H = sph.shape.H
    print(f"sphere c={c:+d}      H in [{H.min():.9f}, {H.max():.9f}]   sup|S| = {np.sqrt(sph.shape.S_abs2).max():.2e}"
          f"   nu in [{sph.shape.nu.min():+.3f}, {sph.shape.nu.max():+.3f}]")
