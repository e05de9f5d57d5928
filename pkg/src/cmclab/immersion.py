"""Pointwise geometry of a surface immersed in M^2(c) x R.

The immersion ``F(x, y) = (u, v, t)`` is evaluated on jets, so the metric,
its Christoffel symbols, the second fundamental form and the intrinsic
curvature all come from exact derivatives.  Every routine is vectorised over
arbitrary batch shapes; a grid of base points is one call.

Operators (``A``, ``phi``, ``S``) are stored as mixed tensors in the
parameter frame, ``M[..., i, j] = M^i_j``.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import Callable, Sequence, Union

import numpy as np

from . import ambient, expr
from .jets import Jet

DEGENERATE_DET_G = 1e-12

SurfaceMap = Union[Sequence["expr.Node"], Callable]


class DegenerateImmersionError(ValueError):
    pass


class NotCMCError(ValueError):
    pass


@dataclass(frozen=True)
class ShapeData:
    c: int
    position: np.ndarray  # (..., 3) chart coordinates (u, v, t)
    tangents: np.ndarray  # (..., 2, 3) dF/dx, dF/dy
    g: np.ndarray
    g_inv: np.ndarray
    det_g: np.ndarray
    christoffels: np.ndarray  # (..., 2, 2, 2), [k, i, j] = Gamma^k_ij
    N: np.ndarray  # (..., 3)
    nu: np.ndarray
    T: np.ndarray  # (..., 2) parameter-frame components
    II: np.ndarray  # (..., 2, 2) second fundamental form, lower indices
    A: np.ndarray
    H: np.ndarray
    phi: np.ndarray
    S: np.ndarray
    Q20_abs2: np.ndarray
    K_int: np.ndarray
    K_ext: np.ndarray

    @property
    def shape(self) -> tuple[int, ...]:
        return np.shape(self.H)

    def __getitem__(self, index) -> ShapeData:
        kw = {}
        for f in fields(self):
            val = getattr(self, f.name)
            kw[f.name] = val if f.name == "c" else val[index]
        return ShapeData(**kw)

    def flipped(self) -> ShapeData:
        """Same surface with the opposite unit normal."""
        return replace(
            self,
            N=-self.N,
            nu=-self.nu,
            II=-self.II,
            A=-self.A,
            H=-self.H,
            phi=-self.phi,
            S=_s_operator(-self.A, -self.H, self.T, self.g, self.nu, self.c),
        )

    # -- derived quantities in a g-orthonormal frame --------------------------

    @property
    def frame(self) -> np.ndarray:
        """Columns are a g-orthonormal frame ``f_a`` in parameter components."""
        return orthonormal_frame(self.g)

    def in_frame(self, M: np.ndarray) -> np.ndarray:
        """Orthonormal-frame components of a mixed operator field."""
        return operator_in_frame(M, self.g)

    def vector_in_frame(self, X: np.ndarray) -> np.ndarray:
        L = np.linalg.cholesky(self.g)
        return np.einsum("...ji,...j->...i", L, X)  # L^T X

    @property
    def T_abs2(self):
        return np.einsum("...i,...ij,...j->...", self.T, self.g, self.T)

    @property
    def A_abs2(self):
        return tensor_norm(self.A, self.g) ** 2

    @property
    def phi_abs2(self):
        return tensor_norm(self.phi, self.g) ** 2

    @property
    def S_abs2(self):
        return tensor_norm(self.S, self.g) ** 2

    def frame_vectors(self) -> np.ndarray:
        """Ambient chart components of the orthonormal frame, shape ``(..., 2, 3)``."""
        return np.einsum("...ia,...ik->...ak", self.frame, self.tangents)


def orthonormal_frame(g: np.ndarray) -> np.ndarray:
    L = np.linalg.cholesky(g)
    return np.swapaxes(np.linalg.inv(L), -1, -2)  # L^{-T}


def operator_in_frame(M: np.ndarray, g: np.ndarray) -> np.ndarray:
    L = np.linalg.cholesky(g)
    Lt = np.swapaxes(L, -1, -2)
    return Lt @ M @ np.linalg.inv(Lt)


def tensor_norm(W: np.ndarray, g: np.ndarray) -> np.ndarray:
    """``|W| = sqrt(sum_a |W f_a|^2)`` over a g-orthonormal frame ``f_a``."""
    What = operator_in_frame(np.asarray(W, dtype=float), np.asarray(g, dtype=float))
    return np.sqrt(np.sum(What**2, axis=(-2, -1)))


def _s_operator(A, H, T, g, nu, c):
    T_low = np.einsum("...ij,...j->...i", g, T)
    eye = np.eye(2)
    coef = 0.5 * c * (1.0 - nu**2) - 2.0 * H**2
    return (
        2.0 * H[..., None, None] * A
        - c * np.einsum("...i,...j->...ij", T, T_low)
        + coef[..., None, None] * eye
    )


def _brioschi(E, F, G) -> np.ndarray:
    Eu, Ev = E.derivative(1, 0), E.derivative(0, 1)
    Fu, Fv = F.derivative(1, 0), F.derivative(0, 1)
    Gu, Gv = G.derivative(1, 0), G.derivative(0, 1)
    Evv, Fuv, Guu = E.derivative(0, 2), F.derivative(1, 1), G.derivative(2, 0)
    e, f, gg = E.value, F.value, G.value
    m1 = np.stack(
        [
            np.stack([-0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev], -1),
            np.stack([Fv - 0.5 * Gu, e, f], -1),
            np.stack([0.5 * Gv, f, gg], -1),
        ],
        -2,
    )
    zero = np.zeros_like(e)
    m2 = np.stack(
        [
            np.stack([zero, 0.5 * Ev, 0.5 * Gu], -1),
            np.stack([0.5 * Ev, e, f], -1),
            np.stack([0.5 * Gu, f, gg], -1),
        ],
        -2,
    )
    return (np.linalg.det(m1) - np.linalg.det(m2)) / (e * gg - f * f) ** 2


def map_jets(F: SurfaceMap, xj: Jet, yj: Jet, bindings=None) -> tuple[Jet, Jet, Jet]:
    """Jets of the three chart components of ``F``."""
    if callable(F):
        comps = F(xj, yj)
    else:
        comps = [expr.evaluate(node, xj, yj, bindings) for node in F]
    return tuple(expr.as_jet(cmp, xj.batch_shape, xj.order) for cmp in comps)


def shape_data(F: SurfaceMap, p, c: int, bindings=None, order: int = 3, orientation=None) -> ShapeData:
    """All pointwise geometric quantities of ``F`` at parameter point(s) ``p``.

    ``orientation`` is +1 or -1 to fix the normal relative to the cross
    product of the coordinate tangents; ``None`` flips it wherever the mean
    curvature would come out negative.
    """
    if order < 3:
        raise ValueError("jet order must be at least 3")
    ambient._check_c(c)
    x0, y0 = np.broadcast_arrays(np.asarray(p[0], dtype=float), np.asarray(p[1], dtype=float))
    xj = Jet.variable(x0, 0, order)
    yj = Jet.variable(y0, 1, order)
    u, v, t = map_jets(F, xj, yj, bindings)
    ambient._denominator(u.value, v.value, c)

    lam = 2.0 / (1.0 + c * (u * u + v * v))
    lam2 = lam * lam
    comps = (u, v, t)
    weights = (lam2, lam2, None)
    dF = [[comp.diff(axis) for comp in comps] for axis in (0, 1)]

    def g_entry(i, j):
        total = dF[i][2] * dF[j][2]
        for a in range(2):
            total = total + weights[a] * dF[i][a] * dF[j][a]
        return total

    E, Fm, G = g_entry(0, 0), g_entry(0, 1), g_entry(1, 1)
    g = np.stack([np.stack([E.value, Fm.value], -1), np.stack([Fm.value, G.value], -1)], -2)
    det_g = E.value * G.value - Fm.value**2
    if np.any(det_g < DEGENERATE_DET_G) or not np.all(np.isfinite(det_g)):
        raise DegenerateImmersionError(f"det g = {np.min(det_g):.3e} below {DEGENERATE_DET_G:g}")
    g_inv = np.linalg.inv(g)

    gj = [[E, Fm], [Fm, G]]
    dg = np.empty(det_g.shape + (2, 2, 2))  # dg[..., l, i, j] = d_l g_ij
    for l_ in range(2):
        for i in range(2):
            for j in range(2):
                dg[..., l_, i, j] = gj[i][j].derivative(*((1, 0) if l_ == 0 else (0, 1)))
    lower = 0.5 * (
        np.einsum("...ijl->...lij", dg)
        + np.einsum("...jil->...lij", dg)
        - dg
    )  # Gamma_{l i j} = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    christoffels = np.einsum("...kl,...lij->...kij", g_inv, lower)
    K_int = _brioschi(E, Fm, G)

    position = np.stack([u.value, v.value, t.value], -1)
    tangents = np.stack(
        [np.stack([dF[i][a].value for a in range(3)], -1) for i in range(2)], -2
    )
    second = np.empty(det_g.shape + (2, 2, 3))
    for i in range(2):
        for j in range(2):
            second[..., i, j, :] = np.stack([dF[i][a].derivative(*((1, 0) if j == 0 else (0, 1))) for a in range(3)], -1)

    gdiag = ambient.metric(u.value, v.value, c)
    n_low = np.cross(tangents[..., 0, :], tangents[..., 1, :])
    N = n_low / gdiag
    N = N / np.sqrt(np.sum(gdiag * N * N, axis=-1))[..., None]

    Gam = ambient.ambient_christoffels(u.value, v.value, c)
    acc = second + np.einsum("...abd,...ib,...jd->...ija", Gam, tangents, tangents)
    II = np.einsum("...ija,...a->...ij", acc, gdiag * N)

    if orientation is None:
        H_raw = 0.5 * np.einsum("...ij,...ji->...", g_inv, II)
        sign = np.where(H_raw < 0, -1.0, 1.0)
    else:
        if orientation not in (1, -1):
            raise ValueError("orientation must be +1, -1 or None")
        sign = np.full(det_g.shape, float(orientation))
    N = sign[..., None] * N
    II = sign[..., None, None] * II

    A = g_inv @ II
    H = 0.5 * (A[..., 0, 0] + A[..., 1, 1])
    nu = N[..., 2]
    T = np.einsum("...ij,...j->...i", g_inv, tangents[..., :, 2])
    phi = A - H[..., None, None] * np.eye(2)
    S = _s_operator(A, H, T, g, nu, c)

    frame = orthonormal_frame(g)
    II_hat = np.einsum("...ia,...ij,...jb->...ab", frame, II, frame)
    T_hat = np.einsum("...ia,...i->...a", frame, tangents[..., :, 2])  # <f_a, T> = <f_a, d_t>
    q = 2.0 * H[..., None, None] * II_hat - c * np.einsum("...a,...b->...ab", T_hat, T_hat)
    # (2,0)-coefficient normalisation: |Q^(2,0)|^2 = |S|^2 / 8
    Q20_abs2 = (((q[..., 0, 0] - q[..., 1, 1]) / 2.0) ** 2 + q[..., 0, 1] ** 2) / 4.0

    return ShapeData(
        c=c,
        position=position,
        tangents=tangents,
        g=g,
        g_inv=g_inv,
        det_g=det_g,
        christoffels=christoffels,
        N=N,
        nu=nu,
        T=T,
        II=II,
        A=A,
        H=H,
        phi=phi,
        S=S,
        Q20_abs2=Q20_abs2,
        K_int=K_int,
        K_ext=np.linalg.det(A),
    )


@dataclass(frozen=True)
class CMCStats:
    deviation: float
    median_H: float
    sign: int


def cmc_stats(H: np.ndarray) -> CMCStats:
    H = np.asarray(H, dtype=float)
    med = float(np.median(H))
    return CMCStats(float(np.max(np.abs(H - med))), med, int(np.sign(med)))


def cmc_deviation(F: SurfaceMap, grid_points, c: int, bindings=None, order: int = 3) -> CMCStats:
    """Spread of the mean curvature over the given parameter points.

    The normal is fixed globally (no per-point flipping), so a surface whose
    mean curvature changes sign is reported as such.
    """
    sd = shape_data(F, grid_points, c, bindings, order, orientation=1)
    return cmc_stats(sd.H)


def require_cmc(sd: ShapeData, tol: float = 1e-6) -> CMCStats:
    stats = cmc_stats(sd.H)
    if stats.deviation > tol:
        raise NotCMCError(f"mean curvature varies by {stats.deviation:.3e} (> {tol:g})")
    return stats
