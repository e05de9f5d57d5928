"""
Two forms of the Simons-type equation for S
===========================================

The cylinder settles which coefficients are right: every field on it is
parallel, so the left-hand side vanishes and any valid right-hand side must
too.  A rotational CMC neck, where S does not vanish, shows the same split
under grid refinement.
"""

import numpy as np

from cmclab import catalog, identities
from cmclab.calculus import GridSpec

cyl = catalog.make_cmc_cylinder(1.0, catalog.default_domain("cmc_cylinder", 16, 9))
for form in ("corrected", "published"):
    rep = identities.simons_S_residual(cyl, form)
    print(f"cylinder H=1, {form:9s} form: sup |LHS - RHS| = {rep.sup:.10g}")

# A neck: the profile starts with a vertical tangent at distance 0.3 from
# the axis.  Three grids sharing nodes, residuals measured on one core.
spec = GridSpec((-1.0, 1.0), (0.0, 2 * np.pi), 17, 16, periodic_y=True)
neck = catalog.make_rotational_cmc_neck(1, 1.0, 0.3, spec)
levels = identities.refinement_levels(neck, 3)
print("\nneck in S^2 x R, H = 1; grids", [f"{g.spec.nx}x{g.spec.ny}" for g in levels])
for key in ("simons_phi", "simons_S_corrected", "simons_S_published", "hessian_S", "codazzi_S"):
    rep = identities.evaluate(key, levels)
    sups = ", ".join(f"{s:.3e}" for s in rep.parts["sup_by_level"])
    orders = ", ".join(f"{p:.2f}" for p in rep.parts["orders"])
    print(f"  {key:20s} sups [{sups}]  orders [{orders}]  -> {rep.status}")
