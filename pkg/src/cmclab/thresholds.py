"""Pinching polynomials, their positive roots, and theorem-hypothesis bookkeeping.

``p_H`` governs surfaces in ``S^2 x R`` and ``q_H`` surfaces in ``H^2 x R``::

    p_H(t) = -t^2 - t/H + (4H^2 - 1)/2
    q_H(t) = -t^2 - t/H + (8H^4 - 12H^2 - 1)/(4H^2)

``L_H`` and ``M_H`` are their positive roots.  Both polynomials are concave
with positive constant term on the relevant H-range, so each has exactly one
positive root.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from .immersion import ShapeData

H_STAR = float(np.sqrt((12.0 + np.sqrt(176.0)) / 16.0))
EQUALITY_TOL = 1e-9
MINIMAL_TOL = 1e-6
DECLARED_CAVEAT = (
    "completeness and closedness are taken from the surface definition as declared; "
    "a finite grid cannot establish either property"
)

SATISFIED, VIOLATED, NOT_APPLICABLE = "hypotheses-satisfied", "hypotheses-violated", "not-applicable"


class ThresholdDomainError(ValueError):
    pass


def _check_H(H):
    if H == 0:
        raise ThresholdDomainError("the pinching polynomials need H != 0")


def p_H(t, H):
    _check_H(H)
    return -t * t - t / H + (4.0 * H * H - 1.0) / 2.0


def q_H(t, H):
    _check_H(H)
    return -t * t - t / H + (8.0 * H**4 - 12.0 * H * H - 1.0) / (4.0 * H * H)


def _positive_root(poly, H) -> float:
    """Unique positive root of a concave quadratic with ``poly(0) > 0``: bracketed Brent, then one Newton polish."""
    f = lambda t: poly(t, H)  # noqa: E731
    hi = 1.0
    while f(hi) > 0:
        hi *= 2.0
    t = brentq(f, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    slope = -2.0 * t - 1.0 / H
    polished = t - f(t) / slope
    return polished if abs(f(polished)) <= abs(f(t)) else t


def L_H(H: float) -> float:
    """Positive root of ``p_H``; needs ``H > 1/2``."""
    if not H > 0.5:
        raise ThresholdDomainError(f"L_H needs H > 1/2, got {H}")
    return _positive_root(p_H, H)


def M_H(H: float) -> float:
    """Positive root of ``q_H``; needs ``H > H_STAR``."""
    if not H > H_STAR:
        raise ThresholdDomainError(f"M_H needs H > {H_STAR:.6f}, got {H}")
    return _positive_root(q_H, H)


def L_H_formula(H):
    """Quadratic formula for the positive root of ``p_H``, in cancellation-free form."""
    return H * (4 * H * H - 1) / (np.sqrt(8 * H**4 - 2 * H * H + 1) + 1)


def M_H_formula(H):
    """Quadratic formula for the positive root of ``q_H``, in cancellation-free form."""
    return (8 * H**4 - 12 * H * H - 1) / (2 * H * (np.sqrt(8 * H**4 - 12 * H * H) + 1))


def L_H_remark(H):
    """The closed form printed alongside the ``L_H`` theorem (kept for comparison only)."""
    return (4 * H * H - 1) / (np.sqrt(8 * H**4 - 2 * H * H + 1) - 1)


def M_H_remark(H):
    """The closed form printed alongside the ``M_H`` theorem (kept for comparison only)."""
    r = 8 * H**4 - 12 * H * H - 1
    return r / (2 * H * (np.sqrt(r) + 1))


# -- surface invariants and classification ---------------------------------------


@dataclass(frozen=True)
class SurfaceInvariants:
    """Pointwise extrema over all grid nodes; no stencils involved."""

    H: float
    cmc_deviation: float
    sup_A2: float
    sup_S: float
    inf_S: float
    sup_A2_5nu2: float
    sup_phi2_5nu2: float
    inf_phiTT: float

    @classmethod
    def from_shape(cls, sd: ShapeData) -> SurfaceInvariants:
        H = float(np.median(sd.H))
        S = np.sqrt(sd.S_abs2)
        nu2 = sd.nu**2
        phiT = np.einsum("...ij,...j->...i", sd.phi, sd.T)
        phiTT = np.einsum("...i,...ij,...j->...", phiT, sd.g, sd.T)
        return cls(
            H=H,
            cmc_deviation=float(np.max(np.abs(sd.H - H))),
            sup_A2=float(np.max(sd.A_abs2)),
            sup_S=float(np.max(S)),
            inf_S=float(np.min(S)),
            sup_A2_5nu2=float(np.max(sd.A_abs2 + 5 * nu2)),
            sup_phi2_5nu2=float(np.max(sd.phi_abs2 + 5 * nu2)),
            inf_phiTT=float(np.min(phiTT)),
        )

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TheoremVerdict:
    id: str
    ambient_c: int
    verdict: str
    hypotheses: dict = field(default_factory=dict)
    margins: dict = field(default_factory=dict)
    conclusion: str = ""
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "ambient_c": self.ambient_c,
            "verdict": self.verdict,
            "hypotheses": dict(sorted(self.hypotheses.items())),
            "margins": dict(sorted(self.margins.items())),
            "conclusion": self.conclusion,
            "note": self.note,
        }


@dataclass
class ThresholdReport:
    H: float
    c: int
    root_name: str | None
    root: float | None
    root_residual: float | None
    theorems: list[TheoremVerdict]
    caveat: str = DECLARED_CAVEAT

    def verdict(self, theorem_id: str) -> TheoremVerdict:
        for t in self.theorems:
            if t.id == theorem_id:
                return t
        raise KeyError(theorem_id)

    def to_dict(self) -> dict:
        return {
            "H": self.H,
            "c": self.c,
            "root": None if self.root is None else {
                "name": self.root_name, "value": self.root, "polynomial_residual": self.root_residual},
            "theorems": [t.to_dict() for t in self.theorems],
            "caveat": self.caveat,
        }


def _verdict(applicable: bool, holds: dict) -> str:
    if not applicable:
        return NOT_APPLICABLE
    return SATISFIED if all(holds.values()) else VIOLATED


def classify(inv: SurfaceInvariants, c: int, complete: bool = False, closed: bool = False) -> ThresholdReport:
    """Check every theorem's hypotheses against the invariants; a pure function of its inputs."""
    if inv is None:
        raise ValueError("classification needs surface invariants")
    H = inv.H
    Habs = abs(H)
    theorems = []

    # minimal surfaces in H^2 x R
    holds = {
        "complete": complete,
        "non_compact": not closed,
        "minimal": Habs <= MINIMAL_TOL,
        "sup(|A|^2+5nu^2) < 1": inv.sup_A2_5nu2 < 1.0,
    }
    theorems.append(TheoremVerdict(
        "minimal_pinching_H2xR", -1, _verdict(c == -1, holds), holds,
        {"1 - sup(|A|^2+5nu^2)": 1.0 - inv.sup_A2_5nu2},
        "vertical plane over a geodesic of H^2",
    ))

    # CMC surfaces in H^2 x R, traceless pinching
    bound = 2 * H * H + 1
    holds = {
        "complete": complete,
        "sup(|phi|^2+5nu^2) < 2H^2+1": inv.sup_phi2_5nu2 < bound,
        "inf <phi T,T> >= 0": inv.inf_phiTT >= 0.0,
    }
    theorems.append(TheoremVerdict(
        "cmc_traceless_pinching_H2xR", -1, _verdict(c == -1, holds), holds,
        {"2H^2+1 - sup(|phi|^2+5nu^2)": bound - inv.sup_phi2_5nu2, "inf <phi T,T>": inv.inf_phiTT},
        "vertical plane over a geodesic of H^2",
    ))

    L = L_H(Habs) if Habs > 0.5 else None
    M = M_H(Habs) if Habs > H_STAR else None
    theorems += _root_theorems("L", 1, c == 1, inv, L, Habs > 0.5, complete, closed,
                               "H > 1/2", "Hsiang-Pedrosa sphere", "Hsiang-Pedrosa sphere")
    theorems += _root_theorems("M", -1, c == -1, inv, M, Habs > H_STAR, complete, closed,
                               f"H > {H_STAR:.5f}", "Abresch-Rosenberg surface", "Hsiang-Pedrosa sphere")
    if c == 1:
        root_name, root = "L_H", L
        residual = None if L is None else abs(p_H(L, Habs))
    else:
        root_name, root = "M_H", M
        residual = None if M is None else abs(q_H(M, Habs))
    return ThresholdReport(H=H, c=c, root_name=root_name, root=root, root_residual=residual, theorems=theorems)


def _root_theorems(tag, amb, applicable, inv, root, in_range, complete, closed, range_text, complete_concl, closed_concl):
    name = f"{tag}_H"
    out = []
    ambient = "S2xR" if amb == 1 else "H2xR"
    r = root if root is not None else float("nan")
    gap = None if root is None else root - inv.sup_S
    spread = None if root is None else max(abs(inv.sup_S - r), abs(inv.inf_S - r))
    equality = bool(in_range and spread is not None and spread <= EQUALITY_TOL)

    holds = {"complete": complete, range_text: in_range, f"sup|S| < {name}": in_range and inv.sup_S < r}
    out.append(TheoremVerdict(
        f"{tag}_pinching_complete_{ambient}", amb, _verdict(applicable, holds), holds,
        {f"{name} - sup|S|": gap}, complete_concl,
    ))

    holds = {"complete": complete, range_text: in_range, f"|S| = {name} everywhere": equality}
    out.append(TheoremVerdict(
        f"{tag}_nonexistence_{ambient}", amb, _verdict(applicable, holds), holds,
        {f"max | |S| - {name} |": spread},
        "no such surface exists",
        note="equality realised" if equality else "equality not realised",
    ))

    holds = {"closed": closed, range_text: in_range, f"|S| <= {name}": in_range and inv.sup_S <= r}
    out.append(TheoremVerdict(
        f"{tag}_pinching_closed_{ambient}", amb, _verdict(applicable, holds), holds,
        {f"{name} - sup|S|": gap}, closed_concl,
    ))
    return out


def roots_table(Hs) -> list[dict]:
    """Rows ``(H, L_H, M_H, residuals)``; entries outside a root's domain are ``None``.

    ``H = 1/2`` and ``H`` within ``1e-5`` of ``H_STAR`` are boundary rows whose
    root is reported as ``0``.
    """
    rows = []
    for H in Hs:
        H = float(H)
        row = {"H": H, "L_H": None, "p_residual": None, "M_H": None, "q_residual": None}
        if H > 0.5:
            row["L_H"] = L_H(H)
            row["p_residual"] = abs(p_H(row["L_H"], H))
        elif H == 0.5:
            row["L_H"], row["p_residual"] = 0.0, abs(p_H(0.0, H))
        if abs(H - H_STAR) <= 1e-5:
            row["M_H"], row["q_residual"] = 0.0, abs(q_H(0.0, H))
        elif H > H_STAR:
            row["M_H"] = M_H(H)
            row["q_residual"] = abs(q_H(row["M_H"], H))
        rows.append(row)
    return rows
