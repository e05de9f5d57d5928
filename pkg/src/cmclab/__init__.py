"""Numerical verification of Simons-type identities for CMC surfaces in M^2(c) x R."""

from . import ambient, calculus, catalog, expr, identities, immersion, jets, profile, thresholds
from .calculus import GridSpec, SurfaceGrid
from .immersion import ShapeData, shape_data
from .identities import ResidualReport, run_ledger
from .thresholds import L_H, M_H, classify, p_H, q_H

__all__ = [
    "ambient", "calculus", "catalog", "expr", "identities", "immersion", "jets", "profile", "thresholds",
    "GridSpec", "SurfaceGrid", "ShapeData", "shape_data", "ResidualReport", "run_ledger",
    "L_H", "M_H", "classify", "p_H", "q_H",
]
