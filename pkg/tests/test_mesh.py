import numpy as np
import pytest

from csfmelt.errors import InvalidInputError
from csfmelt.mesh import Cartesian2D, Interval1D


def test_uniform_interval():
    m = Interval1D.uniform(100e-6, 1e-6)
    assert m.n_elements == 200
    assert m.nodes[m.node_index(0.0)] == 0.0
    with pytest.raises(InvalidInputError):
        Interval1D.uniform(1.0, 0.3)
    with pytest.raises(InvalidInputError):
        Interval1D.uniform(1.5, 1.0)


def test_graded_interval():
    eps, n_i = 1e-6, 32
    m = Interval1D.graded(100e-6, eps / n_i, eps, 1e-7, 1.05)
    x = m.nodes
    assert x[0] == -100e-6 and x[-1] == 100e-6
    np.testing.assert_allclose(x + x[::-1], 0.0, atol=1e-20)
    m.node_index(0.0)
    fine = np.abs(x[:-1] + 0.5 * np.diff(x)) < eps
    np.testing.assert_allclose(np.diff(x)[fine], eps / n_i, rtol=1e-9)
    h = np.diff(x)
    assert h.max() <= 1e-7 * (1 + 1e-9)
    assert np.all(h[1:] / h[:-1] < 1.05 + 1e-9)
    # fine region covering the domain falls back to a uniform mesh
    u = Interval1D.graded(1e-6, 0.1e-6, 2e-6)
    np.testing.assert_allclose(np.diff(u.nodes), 0.1e-6)


def test_quadrature_exact_for_cubics():
    m = Interval1D(np.array([-1.0, -0.2, 0.5, 2.0]))
    pts, wj, shape = m.quadrature()
    assert np.sum(wj * pts**3) == pytest.approx((2.0**4 - 1.0) / 4)
    np.testing.assert_allclose(shape.sum(axis=0), 1.0)


def test_invalid_nodes():
    with pytest.raises(InvalidInputError):
        Interval1D(np.array([0.0, 0.0, 1.0]))
    with pytest.raises(InvalidInputError):
        Interval1D(np.array([0.0]))


def test_cartesian_topology():
    m = Cartesian2D.uniform((0, 3), (0, 2), 3, 2)
    assert (m.nx, m.ny, m.n_nodes, m.n_elements) == (4, 3, 12, 6)
    conn = m.connectivity()
    xy = m.coordinates[conn[0]]
    np.testing.assert_array_equal(xy, [[0, 0], [1, 0], [1, 1], [0, 1]])
    np.testing.assert_array_equal(m.boundary_nodes("bottom"), [0, 1, 2, 3])
    np.testing.assert_array_equal(m.boundary_nodes("left"), [0, 4, 8])
    with pytest.raises(InvalidInputError):
        m.boundary_nodes("front")
