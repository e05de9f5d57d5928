"""The residual ledger: one numerical check per curvature identity.

Every check produces a per-node residual field and a :class:`ResidualReport`.
Two tolerance regimes apply:

* ``analytic`` identities involve only pointwise jet data, so their residual
  is compared against an absolute tolerance;
* ``grid`` identities differentiate fields on the grid, so their residual
  carries an ``O(h^2)`` floor.  They pass when they vanish to ``EXACT_TOL``
  (fields that are parallel or identically zero) or when refinement shows an
  observed order in ``ORDER_WINDOW``.

Operators are mixed tensors in the parameter frame; the algebraic right-hand
sides are built with ``g`` only, never with grid stencils, so discretisation
error sits on the left-hand sides alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import ambient
from .calculus import (
    CORE_MARGIN,
    SurfaceGrid,
    codazzi_residual,
    covariant_derivative,
    observed_order,
    rough_laplacian,
    scalar_laplacian,
)
from .immersion import NotCMCError, ShapeData, require_cmc, tensor_norm

ANALYTIC_TOL = 1e-8
EXACT_TOL = 1e-9
ORDER_WINDOW = (1.5, 2.5)
MIN_H = 1e-6

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass
class ResidualReport:
    id: str
    sup: float
    mean: float
    grid: dict
    kind: str  # "analytic" | "grid"
    tolerance: float
    verdict: str
    order: float | None = None
    parts: dict = field(default_factory=dict)
    status: str = ""  # "exact", "converging", "non-convergent", "within-tolerance", ...
    severity: str = "error"  # "error" | "warning" | "info"
    field: np.ndarray | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "sup": self.sup,
            "mean": self.mean,
            "order": self.order,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "status": self.status,
            "severity": self.severity,
            "parts": {k: v for k, v in sorted(self.parts.items())},
            "grid": self.grid,
        }


# -- helpers ------------------------------------------------------------------


def physical_core(grid: SurfaceGrid, margin: tuple[float, float] | None = None) -> np.ndarray:
    """Nodes at parameter distance ``>= margin`` from every non-periodic edge.

    ``margin`` defaults to ``CORE_MARGIN`` node spacings of ``grid``; passing
    the coarse grid's margin to its refinements keeps one physical core.
    """
    spec = grid.spec
    if margin is None:
        margin = (CORE_MARGIN * spec.hx, CORE_MARGIN * spec.hy)
    X, Y = spec.mesh()
    mask = np.ones(X.shape, dtype=bool)
    for coord, (lo, hi), m, periodic, h in (
        (X, spec.x, margin[0], spec.periodic_x, spec.hx),
        (Y, spec.y, margin[1], spec.periodic_y, spec.hy),
    ):
        if not periodic:
            slack = 1e-9 * h
            mask &= (coord - lo >= m - slack) & (hi - coord >= m - slack)
    return mask


def default_margin(grid: SurfaceGrid) -> tuple[float, float]:
    return (CORE_MARGIN * grid.spec.hx, CORE_MARGIN * grid.spec.hy)


def mixed_apply(M, X):
    return np.einsum("...ij,...j->...i", M, X)


def g_inner(sd: ShapeData, X, Y):
    return np.einsum("...i,...ij,...j->...", X, sd.g, Y)


def compose(*ops):
    out = ops[0]
    for op in ops[1:]:
        out = np.einsum("...ij,...jk->...ik", out, op)
    return out


def trace(M):
    return np.einsum("...ii->...", M)


def identity_op(sd: ShapeData):
    return np.broadcast_to(np.eye(2), sd.g.shape).copy()


def T_flat_T(sd: ShapeData):
    """Mixed operator ``x -> <x, T> T``."""
    Tl = np.einsum("...ij,...j->...i", sd.g, sd.T)
    return np.einsum("...i,...j->...ij", sd.T, Tl)


def operator_residual(sd: ShapeData, R):
    """Pointwise norm of an operator residual in a g-orthonormal frame."""
    return tensor_norm(R, sd.g)


def mean_curvature(grid: SurfaceGrid, sd: ShapeData | None = None) -> float:
    sd = sd or grid.shape
    return float(np.median(sd.H))


def _require_nonzero_H(H: float):
    if abs(H) < MIN_H:
        raise NotCMCError(f"mean curvature {H:.3g} too close to zero for the S-equations")


# -- identity fields ----------------------------------------------------------
# Each returns (residual_field, parts) where parts maps names to fields whose
# sup-norms are also reported.


def gauss_field(grid: SurfaceGrid):
    sd = grid.shape
    return sd.K_int - sd.K_ext - sd.c * sd.nu**2, {}


def rbar_of_A(sd: ShapeData) -> np.ndarray:
    """``<Rbar(A) e_a, e_b>`` in the g-orthonormal frame, assembled from ambient curvature sums."""
    E = sd.frame_vectors()  # (..., 2, 3) ambient components of e_1, e_2
    Af = sd.in_frame(sd.A)  # frame matrix, Af[a, b] = <A e_b, e_a>
    AE = np.einsum("...ba,...bk->...ak", Af, E)  # A e_a as ambient vectors
    N = sd.N
    u, v = sd.position[..., 0], sd.position[..., 1]
    c = sd.c

    def R(x, y, z, w):
        return ambient.ambient_curvature(x, y, z, w, u, v, c)

    out = np.zeros(sd.g.shape)
    for a in range(2):
        for b in range(2):
            x, y = E[..., a, :], E[..., b, :]
            total = 0.0
            for i in range(2):
                ei = E[..., i, :]
                total = (
                    total
                    - R(ei, y, ei, AE[..., a, :])
                    - R(ei, x, ei, AE[..., b, :])
                    + Af[..., a, b] * R(ei, N, ei, N)
                    - 2.0 * R(ei, x, y, AE[..., i, :])
                )
            out[..., a, b] = total
    return out


def rbar_A_field(grid: SurfaceGrid):
    sd = grid.shape
    H = mean_curvature(grid)
    lhs = rbar_of_A(sd)
    nu2 = sd.nu**2
    rhs = sd.c * (5 * nu2 - 1)[..., None, None] * sd.in_frame(sd.A) - (4 * sd.c * H * nu2)[..., None, None] * np.eye(2)
    diff = lhs - rhs
    return np.sqrt(np.sum(diff**2, axis=(-2, -1))), {}


def normal_curvature_field(grid: SurfaceGrid):
    """``<Rbar(N, x) y, N> + c{<x,T><y,T> - <x,y>|T|^2}`` over frame pairs."""
    sd = grid.shape
    E = sd.frame_vectors()
    Tf = sd.vector_in_frame(sd.T)
    u, v = sd.position[..., 0], sd.position[..., 1]
    T2 = sd.T_abs2
    worst = np.zeros(sd.H.shape)
    for a in range(2):
        for b in range(2):
            lhs = ambient.ambient_curvature(sd.N, E[..., a, :], E[..., b, :], sd.N, u, v, sd.c)
            rhs = -sd.c * (Tf[..., a] * Tf[..., b] - (a == b) * T2)
            worst = np.maximum(worst, np.abs(lhs - rhs))
    return worst, {}


def hessian_A_rhs(sd: ShapeData, H: float) -> np.ndarray:
    c, nu2, A = sd.c, sd.nu**2, sd.A
    I = identity_op(sd)
    s = lambda f: f[..., None, None]  # noqa: E731
    return (
        -s(sd.A_abs2) * A
        + c * s(5 * nu2 - 1) * A
        - 4 * c * H * s(nu2) * I
        - 2 * c * H * (T_flat_T(sd) - s(sd.T_abs2) * I)
        + 2 * H * compose(A, A)
    )


def hessian_A_field(grid: SurfaceGrid):
    sd = grid.shape
    L, _ = rough_laplacian(grid, sd.A)
    return operator_residual(sd, L - hessian_A_rhs(sd, mean_curvature(grid))), {}


def trace_identities_field(grid: SurfaceGrid):
    sd = grid.shape
    c, H, nu2 = sd.c, mean_curvature(grid), sd.nu**2
    L, LA = rough_laplacian(grid, sd.A)
    part_a = trace(L)
    AT = mixed_apply(sd.A, sd.T)
    rhs_b = (
        -sd.A_abs2**2
        + c * (5 * nu2 - 1) * sd.A_abs2
        - 8 * c * H**2 * nu2
        - 2 * c * H * g_inner(sd, AT, sd.T)
        + 4 * c * H**2 * sd.T_abs2
        + 2 * H * trace(compose(sd.A, sd.A, sd.A))
    )
    part_b = LA - rhs_b
    return np.maximum(np.abs(part_a), np.abs(part_b)), {"trace_I": part_a, "trace_A": part_b}


def simons_phi_field(grid: SurfaceGrid):
    sd = grid.shape
    c, H, nu2 = sd.c, mean_curvature(grid), sd.nu**2
    p2 = sd.phi_abs2
    lhs = 0.5 * scalar_laplacian(grid, p2)
    _, grad2 = covariant_derivative(grid, sd.phi)
    phiTT = g_inner(sd, mixed_apply(sd.phi, sd.T), sd.T)
    rhs = grad2 - p2**2 + (2 * H**2 + 5 * c * nu2 - c) * p2 - 2 * c * H * phiTT
    return lhs - rhs, {}


def _s_traces(sd: ShapeData):
    ST = mixed_apply(sd.S, sd.T)
    return sd.S_abs2, g_inner(sd, ST, sd.T), g_inner(sd, ST, ST)


def simons_S_rhs(sd: ShapeData, H: float, form: str) -> np.ndarray:
    c, nu2 = sd.c, sd.nu**2
    S2, STT, ST2 = _s_traces(sd)
    if form == "published":
        return (
            -(S2**2)
            + S2 * (2.5 * c * nu2 - 0.5 * c + 2 * H**2 - (c / H) * STT)
            + c * ST2
            - STT**2 / (4 * H**2)
        )
    if form == "corrected":
        return (
            -(S2**2) / (4 * H**2)
            + S2 * ((5 * c * nu2 - c) / 2 + 2 * H**2 - (c / (2 * H**2)) * STT)
            + c * ST2
            - STT**2 / (4 * H**2)
        )
    raise ValueError(f"unknown S-equation form {form!r}")


def simons_S_field(grid: SurfaceGrid, form: str = "corrected"):
    sd = grid.shape
    H = mean_curvature(grid)
    _require_nonzero_H(H)
    lhs = 0.5 * scalar_laplacian(grid, sd.S_abs2)
    _, grad2 = covariant_derivative(grid, sd.S)
    return lhs - grad2 - simons_S_rhs(sd, H, form), {}


def hessian_S_rhs(sd: ShapeData, H: float) -> np.ndarray:
    A, S, c = sd.A, sd.S, sd.c
    trAS = trace(compose(A, S))
    return (
        2 * c * (sd.nu**2)[..., None, None] * S
        + 2 * H * compose(S, A)
        - compose(S, A, A)
        + compose(A, S, A)
        - trAS[..., None, None] * A
    )


def hessian_S_field(grid: SurfaceGrid):
    sd = grid.shape
    H = mean_curvature(grid)
    _require_nonzero_H(H)
    L, _ = rough_laplacian(grid, sd.S)
    return operator_residual(sd, L - hessian_S_rhs(sd, H)), {}


def codazzi_S_field(grid: SurfaceGrid):
    return codazzi_residual(grid, grid.shape.S)[0], {}


def ar_differential_field(grid: SurfaceGrid):
    sd = grid.shape
    return sd.Q20_abs2 - sd.S_abs2 / 8.0, {}


@dataclass(frozen=True)
class Identity:
    id: str
    kind: str
    fn: Callable
    needs_cmc: bool = True
    informational: bool = False


IDENTITIES: dict[str, Identity] = {
    i.id: i
    for i in (
        Identity("gauss", "analytic", gauss_field, needs_cmc=False),
        Identity("rbar_A", "analytic", rbar_A_field),
        Identity("normal_curvature", "analytic", normal_curvature_field, needs_cmc=False),
        Identity("ar_differential", "analytic", ar_differential_field, needs_cmc=False),
        Identity("hessian_A", "grid", hessian_A_field),
        Identity("trace_identities", "grid", trace_identities_field),
        Identity("simons_phi", "grid", simons_phi_field),
        Identity("simons_S_corrected", "grid", lambda g: simons_S_field(g, "corrected")),
        Identity("simons_S_published", "grid", lambda g: simons_S_field(g, "published"), informational=True),
        Identity("hessian_S", "grid", hessian_S_field),
        Identity("codazzi_S", "grid", codazzi_S_field),
    )
}
LEDGER_ORDER = tuple(IDENTITIES)
GRID_IDENTITIES = tuple(k for k, v in IDENTITIES.items() if v.kind == "grid")


# -- evaluation -----------------------------------------------------------------


def _sup_mean(field_, mask):
    vals = np.abs(np.asarray(field_)[mask])
    if vals.size == 0:
        raise ValueError("empty core region")
    if not np.all(np.isfinite(vals)):
        raise ValueError("residual undefined inside the core region")
    return float(vals.max()), float(vals.mean())


def verdict_for(kind: str, sups: list[float], tolerance: float) -> tuple[str, str, list[float]]:
    """Verdict, status and observed orders for residual sup-norms on successive refinements."""
    orders = [observed_order(a, b) for a, b in zip(sups, sups[1:])]
    if kind == "analytic":
        ok = all(s <= tolerance for s in sups)
        return (PASS if ok else FAIL), ("within-tolerance" if ok else "above-tolerance"), orders
    if all(s <= EXACT_TOL for s in sups):
        return PASS, "exact", orders
    if not orders:
        return INCONCLUSIVE, "needs-refinement", orders
    lo, hi = ORDER_WINDOW
    if all(lo <= p <= hi for p in orders):
        return PASS, "converging", orders
    return FAIL, "non-convergent", orders


def evaluate(identity_id: str, grids: list[SurfaceGrid] | SurfaceGrid, tolerance: float = ANALYTIC_TOL,
             margin: tuple[float, float] | None = None, cmc_tol: float = 1e-6) -> ResidualReport:
    """Evaluate one identity on a grid or on a refinement sequence of grids.

    With several grids the residual sup is taken over one physical core (the
    coarsest grid's) and the reported order is the last observed one.
    """
    ident = IDENTITIES[identity_id]
    grids = [grids] if isinstance(grids, SurfaceGrid) else list(grids)
    margin = margin or default_margin(grids[0])
    sups, means, parts_sup, field_ = [], [], {}, None
    for grid in grids:
        if ident.needs_cmc:
            require_cmc(grid.shape, cmc_tol)
        field_, parts = ident.fn(grid)
        mask = physical_core(grid, margin)
        s, m = _sup_mean(field_, mask)
        sups.append(s)
        means.append(m)
        parts_sup = {k: _sup_mean(v, mask)[0] for k, v in parts.items()}
    verdict, status, orders = verdict_for(ident.kind, sups, tolerance)
    if len(grids) > 1:
        parts_sup = {**parts_sup, "sup_by_level": sups, "orders": orders}
    return ResidualReport(
        id=identity_id,
        sup=sups[-1],
        mean=means[-1],
        grid=grids[-1].spec.to_dict(),
        kind=ident.kind,
        tolerance=tolerance if ident.kind == "analytic" else EXACT_TOL,
        verdict=verdict,
        order=orders[-1] if orders else None,
        parts=parts_sup,
        status=status,
        severity="info" if ident.informational else "error",
        field=field_,
    )


def refinement_levels(grid: SurfaceGrid, levels: int) -> list[SurfaceGrid]:
    out = [grid]
    for _ in range(levels - 1):
        out.append(out[-1].refined())
    return out


def run_ledger(grids: list[SurfaceGrid] | SurfaceGrid, ids=None, tolerance: float = ANALYTIC_TOL) -> list[ResidualReport]:
    """All applicable identities, in ledger order.  Preconditions that fail are reported, not raised."""
    grids = [grids] if isinstance(grids, SurfaceGrid) else list(grids)
    reports = []
    for identity_id in ids or LEDGER_ORDER:
        try:
            reports.append(evaluate(identity_id, grids, tolerance))
        except NotCMCError as exc:
            reports.append(_not_applicable(identity_id, grids[-1], tolerance, str(exc)))
    return reports


def _not_applicable(identity_id, grid, tolerance, reason) -> ResidualReport:
    ident = IDENTITIES[identity_id]
    return ResidualReport(
        id=identity_id, sup=float("nan"), mean=float("nan"), grid=grid.spec.to_dict(), kind=ident.kind,
        tolerance=tolerance, verdict="not-applicable", status=reason, severity="info",
    )


# -- public single-identity entry points ----------------------------------------


def gauss_residual(grid, **kw):
    return evaluate("gauss", grid, **kw)


def rbar_A_residual(grid, **kw):
    return evaluate("rbar_A", grid, **kw)


def normal_curvature_residual(grid, **kw):
    return evaluate("normal_curvature", grid, **kw)


def hessian_A_residual(grid, **kw):
    return evaluate("hessian_A", grid, **kw)


def trace_identities_residual(grid, **kw):
    return evaluate("trace_identities", grid, **kw)


def simons_phi_residual(grid, **kw):
    return evaluate("simons_phi", grid, **kw)


def simons_S_residual(grid, form: str = "corrected", **kw):
    if form not in ("corrected", "published"):
        raise ValueError(f"unknown S-equation form {form!r}")
    return evaluate(f"simons_S_{form}", grid, **kw)


def hessian_S_residual(grid, **kw):
    return evaluate("hessian_S", grid, **kw)


def codazzi_S_residual(grid, **kw):
    return evaluate("codazzi_S", grid, **kw)


def ar_differential_residual(grid, **kw):
    return evaluate("ar_differential", grid, **kw)
