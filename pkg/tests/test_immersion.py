"""Pointwise surface geometry: closed forms, algebraic invariants, frame independence."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmclab import catalog, expr, immersion, jets
from cmclab.immersion import DegenerateImmersionError, shape_data, tensor_norm


def parse_map(*sources):
    return tuple(expr.parse(s) for s in sources)


# -- closed forms ---------------------------------------------------------------------------


@pytest.mark.parametrize("c, t0", [(1, 0.3), (-1, -2.0)])
def test_slice(c, t0):
    sd = shape_data(parse_map("x", "y", str(t0)), (0.1, -0.2), c)
    assert sd.nu**2 == pytest.approx(1.0)
    for name in ("T", "A", "H", "phi", "S"):
        assert np.max(np.abs(getattr(sd, name))) < 1e-14
    assert sd.K_int == pytest.approx(c, rel=1e-10)


def test_cylinder_H1(cylinder_H1):
    sd = cylinder_H1.shape
    eig = np.sort(np.linalg.eigvals(sd.A), axis=-1)
    np.testing.assert_allclose(eig[..., 0], 0.0, atol=1e-12)
    np.testing.assert_allclose(eig[..., 1], 2.0, atol=1e-12)
    np.testing.assert_allclose(sd.nu, 0.0, atol=1e-14)
    np.testing.assert_allclose(sd.H, 1.0, atol=1e-12)
    # frame (horizontal, vertical): S = diag(2H^2 + 1/2, -(2H^2 + 1/2))
    S_hat = sd.in_frame(sd.S)
    np.testing.assert_allclose(S_hat[..., 0, 0], 2.5, atol=1e-12)
    np.testing.assert_allclose(S_hat[..., 1, 1], -2.5, atol=1e-12)
    np.testing.assert_allclose(S_hat[..., 0, 1], 0.0, atol=1e-12)
    np.testing.assert_allclose(np.sqrt(sd.S_abs2), math.sqrt(2) / 2 * 5, rtol=1e-12)
    np.testing.assert_allclose(sd.A_abs2, 4.0, rtol=1e-12)
    np.testing.assert_allclose(sd.phi_abs2, 2.0, rtol=1e-12)


def test_vertical_plane(vertical_plane_grid):
    sd = vertical_plane_grid.shape
    np.testing.assert_allclose(sd.H, 0.0, atol=1e-12)
    np.testing.assert_allclose(sd.nu, 0.0, atol=1e-14)
    np.testing.assert_allclose(sd.T_abs2, 1.0, rtol=1e-12)
    np.testing.assert_allclose(sd.S_abs2, 0.5, rtol=1e-12)
    # frame (E, T) with E horizontal: S = diag(-1/2, 1/2), i.e. diag(1/2, -1/2) in (T, E)
    S_hat = sd.in_frame(sd.S)
    np.testing.assert_allclose(S_hat[..., 0, 0], -0.5, atol=1e-12)
    np.testing.assert_allclose(S_hat[..., 1, 1], 0.5, atol=1e-12)


# -- tensor norms -----------------------------------------------------------------------------


def test_tensor_norm_examples():
    g = np.array([[2.0, 0.3], [0.3, 1.5]])
    assert tensor_norm(np.eye(2), g) ** 2 == pytest.approx(2.0)
    a = 0.7
    assert tensor_norm(np.diag([a, -a]), np.eye(2)) ** 2 == pytest.approx(2 * a * a)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_tensor_norm_is_frame_independent(seed):
    rng = np.random.default_rng(seed)
    B = rng.normal(size=(2, 2)) + 2 * np.eye(2)
    g = B.T @ B + 0.1 * np.eye(2)
    W = rng.normal(size=(2, 2))
    # change of parameters by P: g' = P^T g P, W' = P^{-1} W P
    P = rng.normal(size=(2, 2)) + 3 * np.eye(2)
    Pinv = np.linalg.inv(P)
    assert tensor_norm(Pinv @ W @ P, P.T @ g @ P) == pytest.approx(tensor_norm(W, g), rel=1e-9)
    # against the invariant formula tr(W W^*) with W^* = g^{-1} W^T g
    direct = np.trace(W @ np.linalg.inv(g) @ W.T @ g)
    assert tensor_norm(W, g) ** 2 == pytest.approx(direct, rel=1e-10)


# -- invariants on samples ---------------------------------------------------------------------

GENERIC_MAPS = [
    (1, ("0.3*x + 0.1*y*y", "0.2*y - 0.1*x*y", "0.4*sin(x) + 0.3*cos(y)")),
    (-1, ("0.2*x + 0.05*sin(y)", "0.25*y", "x*y + 0.2*x*x")),
    (1, ("(0.5 + 0.1*cos(y))*cos(x)", "(0.5 + 0.1*cos(y))*sin(x)", "0.1*sin(y)")),
    (-1, ("0.3*tanh(x)", "0.2*y + 0.1*x", "exp(0.2*y) - x*x")),
]


def _samples(n=200, seed=11):
    return np.random.default_rng(seed).uniform(-1, 1, size=(2, n))


@pytest.fixture(scope="module", params=range(len(GENERIC_MAPS)))
def sampled(request):
    c, sources = GENERIC_MAPS[request.param]
    return shape_data(parse_map(*sources), _samples(), c)


@pytest.fixture(scope="module", params=["slice", "cylinder", "plane", "sphere_s2", "sphere_h2", "neck"])
def catalog_shape(request, slice_grid, cylinder_H1, vertical_plane_grid, sphere_s2, sphere_h2, neck_s2):
    grid = {
        "slice": slice_grid, "cylinder": cylinder_H1, "plane": vertical_plane_grid,
        "sphere_s2": sphere_s2, "sphere_h2": sphere_h2, "neck": neck_s2,
    }[request.param]
    return grid.shape


def _check_invariants(sd):
    np.testing.assert_allclose(sd.nu**2 + sd.T_abs2, 1.0, atol=1e-12)
    tr = lambda M: M[..., 0, 0] + M[..., 1, 1]  # noqa: E731
    assert np.max(np.abs(tr(sd.S))) < 1e-12 * max(1.0, np.max(np.abs(sd.S)))
    assert np.max(np.abs(tr(sd.phi))) < 1e-12 * max(1.0, np.max(np.abs(sd.A)))
    # self-adjointness: g M is symmetric
    for M in (sd.A, sd.phi, sd.S):
        gM = sd.g @ M
        assert np.max(np.abs(gM - np.swapaxes(gM, -1, -2))) < 1e-10 * max(1.0, np.max(np.abs(gM)))
    np.testing.assert_allclose(sd.phi_abs2, sd.A_abs2 - 2 * sd.H**2, atol=1e-10)
    A3 = np.trace(sd.A @ sd.A @ sd.A, axis1=-2, axis2=-1)
    np.testing.assert_allclose(A3, 3 * sd.H * sd.phi_abs2 + 2 * sd.H**3, atol=1e-10 * max(1, np.max(np.abs(A3))))
    np.testing.assert_allclose(sd.K_int, sd.K_ext + sd.c * sd.nu**2, atol=1e-7 * max(1.0, np.max(np.abs(sd.K_int))))
    np.testing.assert_allclose(sd.Q20_abs2, sd.S_abs2 / 8, atol=1e-10 * max(1.0, np.max(sd.S_abs2)))


def test_invariants_generic_maps(sampled):
    _check_invariants(sampled)


def test_invariants_catalog_surfaces(catalog_shape):
    idx = np.random.default_rng(5).choice(catalog_shape.H.size, size=200, replace=True)
    ij = np.unravel_index(idx, catalog_shape.shape)
    _check_invariants(catalog_shape[ij])


# -- reparametrisation ----------------------------------------------------------------------------


def _scalars(sd):
    return np.stack([np.abs(sd.nu), np.abs(sd.H), sd.A_abs2, sd.S_abs2, sd.Q20_abs2, sd.K_int, sd.K_ext])


def _base_map(xj, yj):
    return (0.3 * xj + 0.1 * yj * yj, 0.2 * yj - 0.1 * xj * yj, 0.4 * jets.sin(xj) + 0.3 * jets.cos(yj))


@pytest.mark.parametrize("c", [1, -1])
def test_swap_invariance(c):
    x, y = _samples(50)
    a = shape_data(_base_map, (x, y), c)
    b = shape_data(lambda xj, yj: _base_map(yj, xj), (y, x), c)
    np.testing.assert_allclose(_scalars(a), _scalars(b), atol=1e-9)


@pytest.mark.parametrize("angle", [0.3, 1.1, -2.0])
def test_rotation_invariance(angle):
    co, si = math.cos(angle), math.sin(angle)
    x, y = _samples(50)
    a = shape_data(_base_map, (x, y), 1)
    # parameters (x', y') with (x, y) = R (x', y')
    xp, yp = co * x + si * y, -si * x + co * y
    b = shape_data(lambda xj, yj: _base_map(co * xj - si * yj, si * xj + co * yj), (xp, yp), 1)
    np.testing.assert_allclose(_scalars(a), _scalars(b), atol=1e-9)


def test_orientation_flip():
    sd = shape_data(_base_map, (0.2, 0.1), 1, orientation=1)
    fl = shape_data(_base_map, (0.2, 0.1), 1, orientation=-1)
    assert fl.H == pytest.approx(-sd.H)
    assert fl.S_abs2 == pytest.approx(sd.flipped().S_abs2)
    auto = shape_data(_base_map, (0.2, 0.1), 1)
    assert auto.H >= 0


# -- errors and CMC deviation -----------------------------------------------------------------------


@pytest.mark.parametrize("sources", [("x", "x", "x"), ("x + y", "0", "2*x + 2*y"), ("x*0", "y*0", "0")])
def test_degenerate_maps(sources):
    with pytest.raises(DegenerateImmersionError):
        shape_data(parse_map(*sources), (0.1, 0.2), 1)


def test_diagonal_vertical_plane_is_regular():
    # (x, x, y) has independent tangents (1, 1, 0) and (0, 0, 1): a vertical plane over a geodesic
    sd = shape_data(parse_map("x", "x", "y"), (0.1, 0.2), 1)
    assert sd.det_g > 1e-3
    assert abs(sd.H) < 1e-14 and abs(sd.nu) < 1e-15


def test_jet_order_too_low():
    with pytest.raises(ValueError):
        shape_data(parse_map("x", "y", "0"), (0.0, 0.0), 1, order=2)


def test_chart_domain_propagates():
    from cmclab.ambient import ChartDomainError

    with pytest.raises(ChartDomainError):
        shape_data(parse_map("x + 1", "y", "0"), (0.5, 0.0), -1)


def test_cmc_deviation_examples(sphere_s2):
    pts = np.meshgrid(np.linspace(-0.5, 0.5, 9), np.linspace(-0.5, 0.5, 9), indexing="ij")
    assert immersion.cmc_deviation(parse_map("x", "y", "0.3"), pts, 1).deviation == 0.0
    stats = immersion.cmc_stats(sphere_s2.shape.H)
    assert stats.deviation <= 1e-6 and stats.median_H == pytest.approx(1.0, abs=1e-6) and stats.sign == 1
    wavy = immersion.cmc_deviation(parse_map("x", "y", "0.1*sin(x)*sin(y)"), pts, 1)
    assert wavy.deviation > 1e-2
    with pytest.raises(immersion.NotCMCError):
        immersion.require_cmc(shape_data(parse_map("x", "y", "0.1*sin(x)*sin(y)"), pts, 1))


def test_catalog_sphere_profile_in_range():
    prof = catalog.cached_sphere_profile(1, 1.0)
    assert prof is not None
