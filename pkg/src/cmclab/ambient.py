"""The product spaces M^2(c) x R in a conformal chart.

Both factors use the chart ``lambda(u, v)^2 (du^2 + dv^2) + dt^2`` with
``lambda = 2 / (1 + c (u^2 + v^2))``: stereographic projection for the sphere
(``c = +1``, antipode of the chart centre excluded) and the Poincare disk for
the hyperbolic plane (``c = -1``, ``u^2 + v^2 < 1``).

Functions accept scalars or arrays of matching shape for the coordinates;
vectors carry their three chart components on the last axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ChartDomainError(ValueError):
    pass


class BasePointMismatch(ValueError):
    pass


DT = np.array([0.0, 0.0, 1.0])


def _check_c(c):
    if c not in (1, -1):
        raise ValueError(f"curvature sign must be +1 or -1, got {c!r}")


@dataclass(frozen=True)
class AmbientPoint:
    u: float
    v: float
    t: float
    c: int

    def __post_init__(self):
        _check_c(self.c)
        _denominator(self.u, self.v, self.c)

    @property
    def coords(self) -> np.ndarray:
        return np.array([self.u, self.v, self.t])


@dataclass(frozen=True)
class AmbientVector:
    base: AmbientPoint
    components: tuple[float, float, float]

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.components, dtype=float)


def _denominator(u, v, c):
    d = 1.0 + c * (np.asarray(u) ** 2 + np.asarray(v) ** 2)
    if c == -1 and np.any(d <= 0):
        raise ChartDomainError("point outside the Poincare disk (u^2 + v^2 >= 1)")
    if c == 1 and np.any(d == 0):
        raise ChartDomainError("chart denominator vanishes")
    return d


def conformal_factor(u, v, c):
    """``lambda = 2 / (1 + c (u^2 + v^2))``."""
    _check_c(c)
    return 2.0 / _denominator(u, v, c)


def conformal_gradient(u, v, c):
    """``(d_u log lambda, d_v log lambda)``."""
    d = _denominator(u, v, c)
    return -2.0 * c * np.asarray(u) / d, -2.0 * c * np.asarray(v) / d


def metric(u, v, c) -> np.ndarray:
    """Diagonal of the ambient metric, shape ``(..., 3)``."""
    lam = conformal_factor(u, v, c)
    lam2 = lam * lam
    return np.stack([lam2, lam2, np.ones_like(lam2)], axis=-1)


def inner(x, y, u, v, c):
    """Ambient inner product of chart vectors ``x`` and ``y`` at ``(u, v)``."""
    return np.sum(metric(u, v, c) * np.asarray(x) * np.asarray(y), axis=-1)


def ambient_christoffels(u, v, c) -> np.ndarray:
    """Christoffel symbols ``Gamma[a, b, d]`` (upper ``a``), shape ``(..., 3, 3, 3)``.

    Only the conformal factor of the horizontal block contributes; every
    symbol carrying a ``t`` index is zero.
    """
    lu, lv = conformal_gradient(u, v, c)
    lu, lv = np.broadcast_arrays(lu, lv)
    G = np.zeros(lu.shape + (3, 3, 3))
    # conformal metric e^{2f} delta: Gamma^a_bd = f_b delta_ad + f_d delta_ab - f_a delta_bd
    G[..., 0, 0, 0] = lu
    G[..., 0, 0, 1] = lv
    G[..., 0, 1, 0] = lv
    G[..., 0, 1, 1] = -lu
    G[..., 1, 1, 1] = lv
    G[..., 1, 0, 1] = lu
    G[..., 1, 1, 0] = lu
    G[..., 1, 0, 0] = -lv
    return G


def covariant_derivative_along(x, y_dir, y, u, v, c):
    """``(nabla_x Y)`` given the directional derivative ``y_dir = dY[x]`` of chart components."""
    G = ambient_christoffels(u, v, c)
    return np.asarray(y_dir) + np.einsum("...abd,...b,...d->...a", G, x, y)


def star_project(x) -> np.ndarray:
    """Horizontal part ``x - <x, d_t> d_t``; in the chart it zeroes the ``t`` component."""
    x = np.array(x, dtype=float)
    x[..., 2] = 0.0
    return x


def ambient_curvature(x, y, z, w, u, v, c):
    """``<R(x, y) z, w>`` for the product metric.

    Uses ``R(x,y)z = nabla_x nabla_y z - nabla_y nabla_x z - nabla_[x,y] z`` so
    that the sectional curvature of a horizontal plane is ``c``::

        <R(x,y)z, w> = -c { <x*,z*><y*,w*> - <y*,z*><x*,w*> }
    """
    xs, ys, zs, ws = (star_project(a) for a in (x, y, z, w))
    ip = lambda a, b: inner(a, b, u, v, c)  # noqa: E731
    return -c * (ip(xs, zs) * ip(ys, ws) - ip(ys, zs) * ip(xs, ws))


def curvature(x: AmbientVector, y: AmbientVector, z: AmbientVector, w: AmbientVector) -> float:
    """Curvature 4-tensor on :class:`AmbientVector` arguments sharing one base point."""
    p = x.base
    if any(a.base != p for a in (y, z, w)):
        raise BasePointMismatch("curvature arguments live at different points")
    return float(ambient_curvature(x.array, y.array, z.array, w.array, p.u, p.v, p.c))


def vector_norm(x: AmbientVector) -> float:
    p = x.base
    return float(np.sqrt(inner(x.array, x.array, p.u, p.v, p.c)))


def riemann_from_christoffels(u, v, c, h=1e-3) -> np.ndarray:
    """Chart Riemann tensor ``R[a, b, d, e] = <R(d_d, d_e) d_b, d_a>`` by differencing Christoffels.

    Fourth-order central differences of :func:`ambient_christoffels`; this is
    an independent route to :func:`ambient_curvature` used for cross-checks.
    """
    u = float(u)
    v = float(v)

    def gamma(du, dv):
        return ambient_christoffels(u + du, v + dv, c)

    def d(axis):
        if axis == 2:
            return np.zeros((3, 3, 3))
        e = (h, 0.0) if axis == 0 else (0.0, h)
        f = lambda s: gamma(s * e[0], s * e[1])  # noqa: E731
        return (-f(2) + 8 * f(1) - 8 * f(-1) + f(-2)) / (12 * h)

    G = gamma(0.0, 0.0)
    dG = np.stack([d(0), d(1), d(2)])  # dG[m, a, b, d] = d_m Gamma^a_bd
    # R^a_{b d e} = d_d G^a_{e b} - d_e G^a_{d b} + G^a_{d m} G^m_{e b} - G^a_{e m} G^m_{d b}
    R_up = (
        np.einsum("daeb->abde", dG)
        - np.einsum("eadb->abde", dG)
        + np.einsum("adm,meb->abde", G, G)
        - np.einsum("aem,mdb->abde", G, G)
    )
    gdiag = metric(u, v, c)
    return gdiag[:, None, None, None] * R_up
