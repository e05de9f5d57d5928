"""Model surfaces and the rotational profile construction."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from cmclab import catalog, profile
from cmclab.calculus import GridSpec
from cmclab.catalog import CatalogError, CatalogSpec
from cmclab.immersion import DegenerateImmersionError, NotCMCError, cmc_stats


# -- slice / plane / cylinder ------------------------------------------------------------------------


@pytest.mark.parametrize("fixture, c", [("slice_grid", 1), ("hyperbolic_slice_grid", -1)])
def test_slice_closed_form(fixture, c, request):
    sd = request.getfixturevalue(fixture).shape
    np.testing.assert_allclose(sd.nu**2, 1.0, atol=1e-14)
    assert np.max(np.abs(sd.T)) == 0.0
    assert np.max(np.abs(sd.H)) < 1e-14 and np.max(np.abs(sd.S)) < 1e-14
    np.testing.assert_allclose(sd.K_int, c, atol=1e-10)


def test_slice_outside_hyperbolic_chart():
    from cmclab.ambient import ChartDomainError

    with pytest.raises(ChartDomainError):
        catalog.make_slice(-1, 0.0, GridSpec((-1.0, 1.0), (-1.0, 1.0), 9, 9))


def test_vertical_plane_closed_form(vertical_plane_grid):
    sd = vertical_plane_grid.shape
    assert np.max(sd.A_abs2) < 1e-24
    np.testing.assert_allclose(sd.S_abs2, 0.5, atol=1e-12)
    assert np.max(sd.A_abs2 + 5 * sd.nu**2) < 1.0
    # x is arc length along the geodesic: g = identity
    np.testing.assert_allclose(sd.g, np.broadcast_to(np.eye(2), sd.g.shape), atol=1e-12)


@pytest.mark.parametrize("H", [0.3, 1.0, 2.5])
def test_cylinder_radius(H):
    rho = catalog.cylinder_radius(H)
    assert 1 / math.tan(rho) == pytest.approx(2 * H)


def test_cylinder_closed_forms(cylinder_grid):
    sd = cylinder_grid.shape
    H = float(np.median(sd.H))
    eig = np.sort(np.linalg.eigvals(sd.A).real, axis=-1)
    np.testing.assert_allclose(eig[..., 1], 2 * H, atol=1e-9)
    np.testing.assert_allclose(eig[..., 0], 0.0, atol=1e-9)
    np.testing.assert_allclose(sd.nu, 0.0, atol=1e-9)
    S_hat = sd.in_frame(sd.S)
    np.testing.assert_allclose(S_hat[..., 0, 0], 2 * H * H + 0.5, atol=1e-9)
    np.testing.assert_allclose(S_hat[..., 1, 1], -(2 * H * H + 0.5), atol=1e-9)
    np.testing.assert_allclose(np.sqrt(sd.S_abs2), math.sqrt(2) / 2 * (4 * H * H + 1), atol=1e-9)


# -- rotational spheres --------------------------------------------------------------------------------


@pytest.mark.parametrize("fixture", ["sphere_s2", "sphere_h2"])
def test_sphere_is_cmc_and_has_vanishing_S(fixture, request):
    grid = request.getfixturevalue(fixture)
    sd = grid.shape
    assert cmc_stats(sd.H).deviation <= 1e-6
    np.testing.assert_allclose(np.median(sd.H), 1.0, atol=1e-6)
    assert np.max(np.sqrt(sd.S_abs2)) <= 1e-6
    assert np.all(np.abs(sd.nu) < 1)
    assert np.min(sd.nu) < -0.5 and np.max(sd.nu) > 0.5


@pytest.mark.parametrize("c, H", [(1, 1.0), (-1, 1.0), (1, 0.4), (-1, 0.8)])
def test_profile_closes(c, H):
    prof = profile.sphere_profile(c, H)
    assert prof.length is not None and prof.length > 0
    assert prof.closure_state[0] == pytest.approx(profile.AXIS_EPS, abs=1e-9)
    assert prof.closure_state[2] == pytest.approx(math.pi, abs=1e-3)


def test_profile_against_independent_integration():
    """Nodes from fixed-step RK4 agree with a tightly-toleranced DOP853 run."""
    prof = profile.sphere_profile(1, 1.0)
    eps = profile.AXIS_EPS
    y0 = [eps, 0.5 * eps**2, eps]
    s = np.linspace(0.2, 0.8, 7) * prof.length
    ref = solve_ivp(lambda _s, y: profile.rhs(y, 1, 1.0), (eps, s[-1]), y0, method="DOP853",
                    rtol=1e-12, atol=1e-14, t_eval=s)
    np.testing.assert_allclose(prof.states(s), ref.y.T, atol=1e-7)


def test_profile_first_integral():
    """On the sphere factor the profile conserves the flux lambda-free quantity of rotational CMC curves."""
    # For c = 1: sin(rho) sin(sigma) - 2H (1 - cos(rho)) = const (= 0 for curves meeting the axis).
    prof = profile.sphere_profile(1, 1.0)
    s = np.linspace(0.05, 0.95, 19) * prof.length
    rho, _t, sigma = prof.states(s).T
    flux = np.sin(rho) * np.sin(sigma) - 2 * (1 - np.cos(rho))
    assert np.max(np.abs(flux)) < 1e-8


@settings(max_examples=5, deadline=None)
@given(st.floats(0.4, 3.0))
def test_profile_closes_for_any_positive_H(H):
    prof = profile.sphere_profile(1, H)
    assert prof.closure_state[0] < 2 * profile.AXIS_EPS


def test_profile_domain_errors():
    with pytest.raises(ValueError):
        profile.sphere_profile(-1, 0.5)
    with pytest.raises(ValueError):
        profile.sphere_profile(1, 0.0)
    with pytest.raises(profile.ProfileError):
        profile.sphere_profile(1, 1.0, max_length=0.5)
    with pytest.raises(ValueError):
        profile.neck_profile(1, 1.0, -0.1)


def test_profile_table_rows():
    rows = profile.sphere_profile(1, 1.0).table(9)
    assert len(rows) == 9 and all(len(r) == 4 for r in rows)
    assert rows[0][0] < rows[-1][0]


def test_neck_is_cmc(neck_s2):
    sd = neck_s2.shape
    assert cmc_stats(sd.H).deviation <= 1e-6
    assert np.min(np.sqrt(sd.S_abs2)) > 0.1  # not a Hsiang-Pedrosa sphere


# -- custom / spec --------------------------------------------------------------------------------------


def test_custom_slice_reproduces_make_slice(slice_grid):
    custom = catalog.make_custom(("x", "y", "t0"), {"t0": 0.3}, 1, slice_grid.spec)
    for name in ("g", "christoffels", "N", "A", "S", "K_int"):
        np.testing.assert_allclose(getattr(custom.shape, name), getattr(slice_grid.shape, name), atol=1e-12)


def test_custom_non_cmc(wavy_graph):
    assert cmc_stats(wavy_graph.shape.H).deviation > 1e-2


def test_custom_errors():
    spec = GridSpec((-0.5, 0.5), (-0.5, 0.5), 9, 9)
    with pytest.raises(DegenerateImmersionError):
        catalog.make_custom(("x", "x", "x"), {}, 1, spec)
    with pytest.raises(CatalogError):
        catalog.make_custom(("x", "y"), {}, 1, spec)
    from cmclab.expr import ExprError

    with pytest.raises(ExprError):
        catalog.make_custom(("x", "y", "q"), {}, 1, spec)


def test_admission_gate(wavy_graph, sphere_s2):
    with pytest.raises(NotCMCError):
        catalog._admit(wavy_graph)
    assert catalog._admit(sphere_s2) is sphere_s2


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind="nope"),
        dict(kind="slice", c=0),
        dict(kind="vertical_plane", c=1),
        dict(kind="cmc_cylinder", c=-1, H=1.0),
        dict(kind="cmc_cylinder", c=1, H=0.0),
        dict(kind="rotational_cmc_sphere", c=-1, H=0.5),
        dict(kind="rotational_cmc_neck", c=1, H=1.0),
        dict(kind="custom"),
    ],
)
def test_spec_validation(kwargs):
    with pytest.raises(CatalogError):
        CatalogSpec(**kwargs)


def test_spec_build_round_trip():
    spec = CatalogSpec(kind="cmc_cylinder", c=1, H=1.0, grid=catalog.default_domain("cmc_cylinder", 16, 9))
    grid = spec.build()
    np.testing.assert_allclose(grid.shape.H, 1.0, atol=1e-12)
    d = spec.to_dict()
    assert d["kind"] == "cmc_cylinder" and d["grid"]["nx"] == 16
