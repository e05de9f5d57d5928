"""Shared surfaces for the test suite.

Building a grid means evaluating jets at every node, so the common surfaces
are built once per session.
"""

import numpy as np
import pytest

from cmclab import catalog
from cmclab.calculus import GridSpec


@pytest.fixture(scope="session")
def slice_grid():
    return catalog.make_slice(1, 0.3, catalog.default_domain("slice", 17, 17))


@pytest.fixture(scope="session")
def hyperbolic_slice_grid():
    return catalog.make_slice(-1, -0.2, catalog.default_domain("slice", 17, 17))


@pytest.fixture(scope="session")
def vertical_plane_grid():
    return catalog.make_vertical_plane(catalog.default_domain("vertical_plane", 17, 17))


@pytest.fixture(scope="session", params=[0.6, 1.0, 2.0], ids=lambda h: f"H={h}")
def cylinder_grid(request):
    return catalog.make_cmc_cylinder(request.param, catalog.default_domain("cmc_cylinder", 32, 17))


@pytest.fixture(scope="session")
def cylinder_H1():
    return catalog.make_cmc_cylinder(1.0, catalog.default_domain("cmc_cylinder", 32, 17))


@pytest.fixture(scope="session")
def sphere_s2():
    return catalog.make_rotational_cmc_sphere(1, 1.0, nx=17, ny=16)


@pytest.fixture(scope="session")
def sphere_h2():
    return catalog.make_rotational_cmc_sphere(-1, 1.0, nx=17, ny=16)


@pytest.fixture(scope="session")
def neck_s2():
    spec = GridSpec((-1.0, 1.0), (0.0, 2 * np.pi), 17, 16, periodic_y=True)
    return catalog.make_rotational_cmc_neck(1, 1.0, 0.3, spec)


@pytest.fixture(scope="session")
def wavy_graph():
    """Non-CMC control: a graph over a patch of the sphere factor."""
    return catalog.make_custom(("x", "y", "0.1*sin(x)*sin(y)"), {}, 1, GridSpec((-1.0, 1.0), (-1.0, 1.0), 17, 17))


@pytest.fixture(scope="session")
def torus_grid():
    """A torus inside the chart of S^2 x R, periodic in both parameters."""
    sources = ("(0.5 + 0.1*cos(y))*cos(x)", "(0.5 + 0.1*cos(y))*sin(x)", "0.1*sin(y)")
    spec = GridSpec((0.0, 2 * np.pi), (0.0, 2 * np.pi), 32, 24, periodic_x=True, periodic_y=True)
    return catalog.make_custom(sources, {}, 1, spec)
