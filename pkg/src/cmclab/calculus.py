"""Intrinsic differential operators on rectangular parameter grids.

All stencils are second-order centred differences.  Nodes whose stencil
would leave a non-periodic edge hold ``NaN``; sup-norms are taken over an
interior core.  Christoffel symbols come from the jets (see
:mod:`cmclab.immersion`), so only the outermost derivative is discretised.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .immersion import ShapeData, SurfaceMap, cmc_stats, shape_data

MIN_NODES = 5
CORE_MARGIN = 4


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    x: tuple[float, float]
    y: tuple[float, float]
    nx: int
    ny: int
    periodic_x: bool = False
    periodic_y: bool = False

    def __post_init__(self):
        if self.nx < MIN_NODES or self.ny < MIN_NODES:
            raise GridError(f"grid needs at least {MIN_NODES} nodes per axis, got {self.nx}x{self.ny}")
        if not (self.x[1] > self.x[0] and self.y[1] > self.y[0]):
            raise GridError("empty parameter rectangle")

    def _axis(self, lo_hi, n, periodic):
        lo, hi = lo_hi
        if periodic:
            return lo + (hi - lo) * np.arange(n) / n
        return np.linspace(lo, hi, n)

    @property
    def xs(self) -> np.ndarray:
        return self._axis(self.x, self.nx, self.periodic_x)

    @property
    def ys(self) -> np.ndarray:
        return self._axis(self.y, self.ny, self.periodic_y)

    @property
    def hx(self) -> float:
        return (self.x[1] - self.x[0]) / (self.nx if self.periodic_x else self.nx - 1)

    @property
    def hy(self) -> float:
        return (self.y[1] - self.y[0]) / (self.ny if self.periodic_y else self.ny - 1)

    @property
    def periodic(self) -> tuple[bool, bool]:
        return (self.periodic_x, self.periodic_y)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.xs, self.ys, indexing="ij")

    def refined(self) -> GridSpec:
        """Halve both spacings keeping every existing node."""
        nx = 2 * self.nx if self.periodic_x else 2 * self.nx - 1
        ny = 2 * self.ny if self.periodic_y else 2 * self.ny - 1
        return replace(self, nx=nx, ny=ny)

    def with_nodes(self, nx: int, ny: int) -> GridSpec:
        return replace(self, nx=nx, ny=ny)

    def to_dict(self) -> dict:
        return {
            "x": list(self.x),
            "y": list(self.y),
            "nx": self.nx,
            "ny": self.ny,
            "periodic_x": self.periodic_x,
            "periodic_y": self.periodic_y,
        }


@dataclass(frozen=True)
class SurfaceGrid:
    spec: GridSpec
    c: int
    shape: ShapeData
    label: str = "surface"
    surface_map: SurfaceMap | None = field(default=None, repr=False, compare=False)
    bindings: dict | None = field(default=None, repr=False, compare=False)
    order: int = 3

    @classmethod
    def build(cls, F: SurfaceMap, c: int, spec: GridSpec, bindings=None, order: int = 3, label="surface",
              check_periodic: bool = True) -> SurfaceGrid:
        """Evaluate ``F`` on every node; the normal is flipped globally if the median H is negative."""
        X, Y = spec.mesh()
        sd = shape_data(F, (X, Y), c, bindings, order, orientation=1)
        flip = cmc_stats(sd.H).median_H < 0
        if flip:
            sd = sd.flipped()
        grid = cls(spec, c, sd, label, F, dict(bindings or {}), order)
        if check_periodic:
            grid._check_periodic_edges(F, bindings, order, flip)
        return grid

    def rebuilt(self, spec: GridSpec) -> SurfaceGrid:
        if self.surface_map is None:
            raise GridError("grid carries no surface map to rebuild from")
        return SurfaceGrid.build(self.surface_map, self.c, spec, self.bindings, self.order, self.label)

    def refined(self) -> SurfaceGrid:
        return self.rebuilt(self.spec.refined())

    def _check_periodic_edges(self, F, bindings, order, flip: bool = False):
        for axis, periodic in enumerate(self.spec.periodic):
            if not periodic:
                continue
            if axis == 0:
                pts = (np.full(self.spec.ny, self.spec.x[1]), self.spec.ys)
                ref = self.shape[0]
            else:
                pts = (self.spec.xs, np.full(self.spec.nx, self.spec.y[1]))
                ref = self.shape[:, 0]
            wrapped = shape_data(F, pts, self.c, bindings, order, orientation=-1 if flip else 1)
            for name in ("nu", "H", "det_g", "K_int"):
                a, b = getattr(ref, name), getattr(wrapped, name)
                if name == "nu":
                    a, b = np.abs(a), np.abs(b)
                if np.max(np.abs(a - b)) > 1e-9:
                    raise GridError(f"periodic edge mismatch in {name} along axis {axis}")

    @property
    def h(self) -> tuple[float, float]:
        return (self.spec.hx, self.spec.hy)

    def core_mask(self, margin: int = CORE_MARGIN) -> np.ndarray:
        mask = np.ones((self.spec.nx, self.spec.ny), dtype=bool)
        if not self.spec.periodic_x:
            mask[:margin] = False
            mask[-margin:] = False
        if not self.spec.periodic_y:
            mask[:, :margin] = False
            mask[:, -margin:] = False
        return mask


def _require(grid: SurfaceGrid, n: int = MIN_NODES):
    if grid.spec.nx < n or grid.spec.ny < n:
        raise GridError(f"operator needs at least {n} nodes per axis")


def diff(f: np.ndarray, axis: int, h: float, periodic: bool) -> np.ndarray:
    """Centred first difference along node axis 0 or 1."""
    f = np.asarray(f, dtype=float)
    if periodic:
        return (np.roll(f, -1, axis) - np.roll(f, 1, axis)) / (2.0 * h)
    out = np.full_like(f, np.nan)
    src = [slice(None)] * f.ndim
    dst = [slice(None)] * f.ndim
    hi, lo = list(src), list(src)
    dst[axis] = slice(1, -1)
    hi[axis] = slice(2, None)
    lo[axis] = slice(None, -2)
    out[tuple(dst)] = (f[tuple(hi)] - f[tuple(lo)]) / (2.0 * h)
    return out


def gradient(grid: SurfaceGrid, f: np.ndarray) -> np.ndarray:
    """Parameter partials stacked on a new axis 2: ``out[:, :, k, ...] = d_k f``."""
    return np.stack([diff(f, k, grid.h[k], grid.spec.periodic[k]) for k in range(2)], axis=2)


def _compact_flux_term(a, f, axis, h, periodic):
    """``d_axis(a d_axis f)`` with half-node averaged coefficients."""
    if periodic:
        a_half = 0.5 * (a + np.roll(a, -1, axis))
        flux = a_half * (np.roll(f, -1, axis) - f) / h
        return (flux - np.roll(flux, 1, axis)) / h
    n = f.shape[axis]
    take = lambda arr, s: arr[(slice(None),) * axis + (s,)]  # noqa: E731
    a_half = 0.5 * (take(a, slice(0, n - 1)) + take(a, slice(1, n)))
    flux = a_half * (take(f, slice(1, n)) - take(f, slice(0, n - 1))) / h
    out = np.full_like(f, np.nan)
    inner = (take(flux, slice(1, None)) - take(flux, slice(0, -1))) / h
    out[(slice(None),) * axis + (slice(1, -1),)] = inner
    return out


def scalar_laplacian(grid: SurfaceGrid, f: np.ndarray) -> np.ndarray:
    """Laplace-Beltrami ``(1/sqrt g) d_i (sqrt g g^ij d_j f)`` in conservative form."""
    _require(grid)
    f = np.asarray(f, dtype=float)
    sd = grid.shape
    rg = np.sqrt(sd.det_g)
    w = rg[..., None, None] * sd.g_inv
    (hx, hy), (px, py) = grid.h, grid.spec.periodic
    out = _compact_flux_term(w[..., 0, 0], f, 0, hx, px)
    out = out + _compact_flux_term(w[..., 1, 1], f, 1, hy, py)
    out = out + diff(w[..., 0, 1] * diff(f, 1, hy, py), 0, hx, px)
    out = out + diff(w[..., 1, 0] * diff(f, 0, hx, px), 1, hy, py)
    return out / rg


def grad_norm2(grid: SurfaceGrid, f: np.ndarray) -> np.ndarray:
    df = gradient(grid, f)
    return np.einsum("...i,...ij,...j->...", df, grid.shape.g_inv, df)


def covariant_derivative(grid: SurfaceGrid, M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``nabla_k M^i_j`` (shape ``(nx, ny, 2, 2, 2)``, index order ``k, i, j``) and ``|nabla M|^2``."""
    _require(grid)
    Gam = grid.shape.christoffels
    P = gradient(grid, M)
    P = P + np.einsum("...ikl,...lj->...kij", Gam, M) - np.einsum("...lkj,...il->...kij", Gam, M)
    return P, _norm2_3(grid.shape, P)


def _norm2_3(sd: ShapeData, P):
    return np.einsum(
        "...kij,...abc,...ka,...ib,...jc->...", P, P, sd.g_inv, sd.g, sd.g_inv
    )


def operator_inner(sd: ShapeData, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """``<X, Y> = sum_a <X f_a, Y f_a>`` for mixed operators."""
    return np.einsum("...ij,...kl,...ik,...jl->...", X, Y, sd.g, sd.g_inv)


def rough_laplacian(grid: SurfaceGrid, M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Trace of the second covariant derivative, ``g^{mk} nabla_m nabla_k M``, and ``<nabla^2 M, M>``."""
    _require(grid, 9)
    sd = grid.shape
    Gam = sd.christoffels
    P, _ = covariant_derivative(grid, M)
    dP = gradient(grid, P)  # [.., m, k, i, j]
    Q = (
        dP
        - np.einsum("...nmk,...nij->...mkij", Gam, P)
        + np.einsum("...imn,...knj->...mkij", Gam, P)
        - np.einsum("...nmj,...kin->...mkij", Gam, P)
    )
    L = np.einsum("...mk,...mkij->...ij", sd.g_inv, Q)
    return L, operator_inner(sd, L, M)


def codazzi_residual(grid: SurfaceGrid, M: np.ndarray) -> tuple[np.ndarray, float]:
    """``|(nabla_{f1} M) f2 - (nabla_{f2} M) f1|`` per node and its sup over the core."""
    P, _ = covariant_derivative(grid, M)
    C = P[..., 0, :, 1] - P[..., 1, :, 0]
    sd = grid.shape
    norm = np.sqrt(np.einsum("...i,...ij,...j->...", C, sd.g, C) / sd.det_g)
    return norm, sup_norm(norm, grid.core_mask())


def sup_norm(field: np.ndarray, mask: np.ndarray) -> float:
    vals = np.abs(np.asarray(field)[mask])
    if vals.size == 0 or np.any(~np.isfinite(vals)):
        raise GridError("core region empty or contains undefined stencil values")
    return float(np.max(vals))


def observed_order(coarse: float, fine: float) -> float:
    """``log2(res(h) / res(h/2))``."""
    if fine == 0.0:
        return float("inf") if coarse > 0 else float("nan")
    return float(np.log2(coarse / fine))
