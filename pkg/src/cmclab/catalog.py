"""Model surfaces with known geometry, ready for the residual ledger.

Each ``make_*`` function returns a :class:`~cmclab.calculus.SurfaceGrid`;
:class:`CatalogSpec` bundles the same choices as plain data so that they can
be written to and read from surface-definition files.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from . import expr, jets
from .calculus import GridSpec, SurfaceGrid
from .immersion import require_cmc
from .profile import ProfileCurve, neck_profile, sphere_profile

KINDS = ("slice", "vertical_plane", "cmc_cylinder", "rotational_cmc_sphere", "rotational_cmc_neck", "custom")
SPHERE_CAP = 0.15
CMC_ADMISSION_TOL = 1e-6


class CatalogError(ValueError):
    pass


@lru_cache(maxsize=16)
def cached_sphere_profile(c: int, H: float) -> ProfileCurve:
    """Profiles are deterministic, so one shooting run per ``(c, H)`` suffices."""
    return sphere_profile(c, float(H))


def default_domain(kind: str, nx: int = 33, ny: int = 33, **params) -> GridSpec:
    """Parameter rectangle used when a definition does not give one."""
    if kind == "slice":
        return GridSpec((-0.5, 0.5), (-0.5, 0.5), nx, ny)
    if kind == "vertical_plane":
        return GridSpec((-1.0, 1.0), (-1.0, 1.0), nx, ny)
    if kind == "cmc_cylinder":
        return GridSpec((0.0, 2 * np.pi), (-1.0, 1.0), nx, ny, periodic_x=True)
    if kind == "rotational_cmc_sphere":
        prof = cached_sphere_profile(params["c"], params["H"])
        L = prof.length
        return GridSpec((SPHERE_CAP * L, (1 - SPHERE_CAP) * L), (0.0, 2 * np.pi), nx, ny, periodic_y=True)
    if kind == "rotational_cmc_neck":
        return GridSpec((-1.0, 1.0), (0.0, 2 * np.pi), nx, ny, periodic_y=True)
    raise CatalogError(f"no default domain for kind {kind!r}")


def make_slice(c: int, t0: float, spec: GridSpec, order: int = 3) -> SurfaceGrid:
    """Horizontal slice ``M^2(c) x {t0}``."""
    F = (expr.Var("x"), expr.Var("y"), expr.Num(float(t0)))
    return SurfaceGrid.build(F, c, spec, order=order, label="slice")


def make_vertical_plane(spec: GridSpec, order: int = 3) -> SurfaceGrid:
    """``gamma x R`` in ``H^2 x R`` over the diameter geodesic ``gamma``, arc-length in ``x``."""
    x, y = expr.Var("x"), expr.Var("y")
    u = expr.Call("tanh", expr.BinOp("/", x, expr.Num(2.0)))
    return SurfaceGrid.build((u, expr.Num(0.0), y), -1, spec, order=order, label="vertical_plane")


def cylinder_radius(H: float) -> float:
    """Geodesic radius of the circle in ``S^2`` with geodesic curvature ``2H``."""
    if H <= 0:
        raise CatalogError("the CMC cylinder needs H > 0")
    return float(np.arctan(1.0 / (2.0 * H)))


def make_cmc_cylinder(H: float, spec: GridSpec, order: int = 3) -> SurfaceGrid:
    """``gamma x R`` in ``S^2 x R``; ``x`` is the angle around the circle, ``y`` the height."""
    r0 = np.tan(0.5 * cylinder_radius(H))

    def F(xj, yj):
        return r0 * jets.cos(xj), r0 * jets.sin(xj), yj

    return SurfaceGrid.build(F, 1, spec, order=order, label="cmc_cylinder")


def _admit(grid: SurfaceGrid) -> SurfaceGrid:
    require_cmc(grid.shape, CMC_ADMISSION_TOL)
    return grid


def make_rotational_cmc_sphere(c: int, H: float, spec: GridSpec | None = None, profile: ProfileCurve | None = None,
                               nx: int = 33, ny: int = 33, order: int = 3) -> SurfaceGrid:
    """Rotational CMC sphere with polar caps removed; ``x`` is profile arc length, ``y`` the rotation angle."""
    profile = profile or cached_sphere_profile(c, H)
    if spec is None:
        L = profile.length
        spec = GridSpec((SPHERE_CAP * L, (1 - SPHERE_CAP) * L), (0.0, 2 * np.pi), nx, ny, periodic_y=True)
    return _admit(SurfaceGrid.build(profile.chart_map(), c, spec, order=order, label="rotational_cmc_sphere"))


def make_rotational_cmc_neck(c: int, H: float, neck_radius: float, spec: GridSpec, order: int = 3) -> SurfaceGrid:
    """Band of a rotational CMC surface around a neck (an unduloid-type piece with ``S != 0``)."""
    profile = neck_profile(c, H, neck_radius)
    return _admit(SurfaceGrid.build(profile.chart_map(), c, spec, order=order, label="rotational_cmc_neck"))


def make_custom(sources, params: dict | None, c: int, spec: GridSpec, order: int = 3) -> SurfaceGrid:
    """Surface from three DSL expressions ``(u, v, t)`` in ``x``, ``y`` and the given parameters."""
    params = dict(params or {})
    F = tuple(expr.parse(s, params) if isinstance(s, str) else s for s in sources)
    if len(F) != 3:
        raise CatalogError("a custom surface needs exactly three expressions (u, v, t)")
    return SurfaceGrid.build(F, c, spec, params, order, label="custom")


@dataclass
class CatalogSpec:
    kind: str
    c: int = 1
    H: float | None = None
    t0: float = 0.0
    neck_radius: float | None = None
    exprs: tuple[str, str, str] | None = None
    params: dict = field(default_factory=dict)
    grid: GridSpec | None = None
    complete: bool = False
    closed: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise CatalogError(f"unknown surface kind {self.kind!r}")
        if self.c not in (1, -1):
            raise CatalogError("c must be +1 or -1")
        if self.kind == "vertical_plane" and self.c != -1:
            raise CatalogError("the vertical plane model lives in H^2 x R (c = -1)")
        if self.kind == "cmc_cylinder" and (self.c != 1 or not self.H or self.H <= 0):
            raise CatalogError("the CMC cylinder needs c = +1 and H > 0")
        if self.kind == "rotational_cmc_sphere":
            if self.H is None or self.H <= (0.0 if self.c == 1 else 0.5):
                raise CatalogError("rotational spheres need H > 0 (c = +1) or H > 1/2 (c = -1)")
        if self.kind == "rotational_cmc_neck" and (self.H is None or not self.neck_radius or self.neck_radius <= 0):
            raise CatalogError("a neck needs H and a positive neck_radius")
        if self.kind == "custom" and (self.exprs is None or len(self.exprs) != 3):
            raise CatalogError("a custom surface needs three expressions")

    def grid_spec(self, nx: int = 33, ny: int = 33) -> GridSpec:
        if self.grid is not None:
            return self.grid
        return default_domain(self.kind, nx, ny, c=self.c, H=self.H)

    def build(self, order: int = 3) -> SurfaceGrid:
        spec = self.grid_spec()
        if self.kind == "slice":
            return make_slice(self.c, self.t0, spec, order)
        if self.kind == "vertical_plane":
            return make_vertical_plane(spec, order)
        if self.kind == "cmc_cylinder":
            return make_cmc_cylinder(self.H, spec, order)
        if self.kind == "rotational_cmc_sphere":
            return make_rotational_cmc_sphere(self.c, self.H, spec, order=order)
        if self.kind == "rotational_cmc_neck":
            return make_rotational_cmc_neck(self.c, self.H, self.neck_radius, spec, order)
        return make_custom(self.exprs, self.params, self.c, spec, order)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["grid"] = self.grid.to_dict() if self.grid else None
        return d
