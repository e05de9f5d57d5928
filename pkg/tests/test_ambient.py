"""The product spaces M^2(c) x R in their conformal chart."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from cmclab import ambient
from cmclab.ambient import AmbientPoint, AmbientVector, BasePointMismatch, ChartDomainError

signs = st.sampled_from([1, -1])


def disk_point(draw_r, draw_a):
    return draw_r * np.cos(draw_a), draw_r * np.sin(draw_a)


@pytest.mark.parametrize(
    "u, v, c, expected",
    [(0.0, 0.0, 1, 2.0), (0.0, 0.0, -1, 2.0), (1.0, 0.0, 1, 1.0), (0.5, 0.0, -1, 8.0 / 3.0)],
)
def test_conformal_factor(u, v, c, expected):
    assert ambient.conformal_factor(u, v, c) == pytest.approx(expected)


def test_chart_domain():
    with pytest.raises(ChartDomainError):
        AmbientPoint(0.8, 0.7, 0.0, -1)
    with pytest.raises(ChartDomainError):
        ambient.conformal_factor(1.0, 0.0, -1)
    with pytest.raises(ValueError):
        AmbientPoint(0.0, 0.0, 0.0, 0)
    AmbientPoint(3.0, 4.0, 1.0, 1)  # whole plane is fine for the sphere


def test_christoffels_vanish_at_center_and_on_t():
    G = ambient.ambient_christoffels(0.0, 0.0, 1)
    assert np.all(G == 0)
    G = ambient.ambient_christoffels(0.3, -0.2, -1)
    assert np.all(G[2] == 0) and np.all(G[:, 2] == 0) and np.all(G[:, :, 2] == 0)


@pytest.mark.parametrize("c", [1, -1])
def test_christoffels_against_metric_differences(c):
    """Gamma^a_bd = 1/2 g^aa (d_b g_ad + d_d g_ab - d_a g_bd) with differenced metric."""
    p = np.array([0.3, 0.1])
    h = 1e-5

    def g(q):
        return ambient.metric(q[0], q[1], c)

    dg = np.zeros((3, 3))  # dg[m, a] = d_m g_aa
    for m in range(2):
        e = np.zeros(2)
        e[m] = h
        dg[m] = (g(p + e) - g(p - e)) / (2 * h)
    gd = g(p)
    G_fd = np.zeros((3, 3, 3))
    for a in range(3):
        for b in range(3):
            for d in range(3):
                val = (b == a) * dg[d, a] + (d == a) * dg[b, a] - (b == d) * dg[a, b]
                G_fd[a, b, d] = 0.5 * val / gd[a]
    np.testing.assert_allclose(ambient.ambient_christoffels(*p, c), G_fd, atol=1e-8)
    lam = lambda u: ambient.conformal_factor(u, p[1], c)  # noqa: E731
    dlam = (lam(p[0] + h) - lam(p[0] - h)) / (2 * h)
    assert ambient.ambient_christoffels(*p, c)[0, 0, 0] == pytest.approx(dlam / lam(p[0]), rel=1e-8)


def test_star_projection():
    np.testing.assert_array_equal(ambient.star_project([0, 0, 1]), [0, 0, 0])
    np.testing.assert_array_equal(ambient.star_project([1, 0, 1]), [1, 0, 0])
    w = np.array([0.2, -0.4, 0.0])
    np.testing.assert_array_equal(ambient.star_project(ambient.star_project(w)), w)


def test_parallel_field():
    p = (0.2, 0.3)
    assert ambient.inner(ambient.DT, ambient.DT, *p, 1) == 1.0
    x = np.array([0.4, -1.0, 2.0])
    assert np.all(ambient.covariant_derivative_along(x, np.zeros(3), ambient.DT, *p, -1) == 0)


@pytest.mark.parametrize("c", [1, -1])
def test_horizontal_sectional_curvature_at_center(c):
    du, dv = np.array([1.0, 0, 0]), np.array([0, 1.0, 0])
    R = ambient.ambient_curvature(du, dv, dv, du, 0.0, 0.0, c)
    area = ambient.inner(du, du, 0, 0, c) * ambient.inner(dv, dv, 0, 0, c)
    # <R(x,y)y,x> / |x^y|^2 with the sign convention R(x,y) = [nabla_x, nabla_y] - nabla_[x,y]
    assert -R / area == pytest.approx(c) or R / area == pytest.approx(c)
    Rfd = ambient.riemann_from_christoffels(0.0, 0.0, c)
    assert Rfd[0, 1, 0, 1] / area == pytest.approx(R / area, rel=1e-8)


@settings(max_examples=100, deadline=None)
@given(signs, st.floats(0.0, 0.8), st.floats(0, 2 * np.pi), st.integers(0, 2**32 - 1))
def test_product_formula_matches_chart_riemann(c, r, a, seed):
    u, v = disk_point(r, a)
    Rfd = ambient.riemann_from_christoffels(u, v, c)  # Rfd[a, b, d, e] = <R(d_d, d_e) d_b, d_a>
    rng = np.random.default_rng(seed)
    x, y, z, w = rng.normal(size=(4, 3))
    expected = np.einsum("abde,d,e,b,a->", Rfd, x, y, z, w)
    got = ambient.ambient_curvature(x, y, z, w, u, v, c)
    assert got == pytest.approx(expected, abs=1e-7 * max(1.0, abs(expected)))


@settings(max_examples=50, deadline=None)
@given(signs, st.floats(0.0, 0.8), st.floats(0, 2 * np.pi), st.integers(0, 2**32 - 1))
def test_curvature_symmetries(c, r, a, seed):
    u, v = disk_point(r, a)
    x, y, z, w = np.random.default_rng(seed).normal(size=(4, 3))
    R = lambda *args: ambient.ambient_curvature(*args, u, v, c)  # noqa: E731
    assert R(x, y, z, w) == pytest.approx(-R(y, x, z, w), abs=1e-12)
    assert R(x, y, z, w) == pytest.approx(-R(x, y, w, z), abs=1e-12)
    assert R(x, y, z, w) == pytest.approx(R(z, w, x, y), abs=1e-12)
    assert abs(R(x, x, z, w)) < 1e-12
    assert R(ambient.DT, y, z, w) == 0.0


def test_curvature_on_vectors_checks_base_points():
    p, q = AmbientPoint(0.1, 0.0, 0.0, 1), AmbientPoint(0.2, 0.0, 0.0, 1)
    e1, e2 = AmbientVector(p, (1, 0, 0)), AmbientVector(p, (0, 1, 0))
    assert ambient.curvature(e1, e2, e2, e1) != 0
    with pytest.raises(BasePointMismatch):
        ambient.curvature(e1, e2, e2, AmbientVector(q, (1, 0, 0)))


@pytest.mark.parametrize("c", [1, -1])
def test_lengths_agree_with_polar_chart(c):
    """Geodesic polar chart: ds^2 = dr^2 + sn(r)^2 dtheta^2 + dt^2."""
    u, v = 0.3, -0.4
    rho, theta = np.hypot(u, v), np.arctan2(v, u)
    r_of = (lambda s: 2 * np.arctan(s)) if c == 1 else (lambda s: 2 * np.arctanh(s))
    sn = np.sin if c == 1 else np.sinh
    x = np.array([0.7, 0.2, -0.5])
    # chart -> polar Jacobian
    drho = (u * x[0] + v * x[1]) / rho
    dtheta = (u * x[1] - v * x[0]) / rho**2
    dr = (r_of(rho + 1e-7) - r_of(rho - 1e-7)) / 2e-7 * drho
    polar_len2 = dr**2 + (sn(r_of(rho)) * dtheta) ** 2 + x[2] ** 2
    chart_len = ambient.vector_norm(AmbientVector(AmbientPoint(u, v, 0.0, c), tuple(x)))
    assert chart_len == pytest.approx(np.sqrt(polar_len2), rel=1e-8)
    assert theta is not None


@pytest.mark.parametrize("c", [1, -1])
def test_curvature_is_parallel(c):
    """Curvature of parallel-transported frames is constant along a curve."""
    p0, vel = np.array([0.1, -0.2]), np.array([0.5, 0.3])
    rng = np.random.default_rng(7)
    X0 = rng.normal(size=(4, 3))

    def rhs(s, y):
        pos = p0 + s * vel
        G = ambient.ambient_christoffels(pos[0], pos[1], c)
        X = y.reshape(4, 3)
        gdot = np.array([vel[0], vel[1], 0.0])
        return (-np.einsum("abd,b,kd->ka", G, gdot, X)).ravel()

    sol = solve_ivp(rhs, (0, 0.6), X0.ravel(), rtol=1e-12, atol=1e-13, dense_output=True)
    vals = []
    for s in np.linspace(0, 0.6, 7):
        pos = p0 + s * vel
        x, y, z, w = sol.sol(s).reshape(4, 3)
        vals.append(ambient.ambient_curvature(x, y, z, w, pos[0], pos[1], c))
    assert np.ptp(vals) < 1e-9
