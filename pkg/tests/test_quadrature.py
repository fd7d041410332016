import numpy as np
import pytest

from relkin import quadrature as quad
from relkin.errors import UsageError


def test_gauss_legendre_polynomial_exactness():
    x, w = quad.gauss_legendre(6, -1.0, 3.0)
    # exact for degree 11
    assert w @ x**11 == pytest.approx((3.0**12 - 1.0) / 12, rel=1e-13)


def test_spherical_grid_ball_volume_and_gaussian():
    g = quad.spherical_grid(24, 12, 24, 9.0)
    assert g.weights.sum() == pytest.approx(4 / 3 * np.pi * 9.0**3, rel=1e-12)
    r2 = (g.nodes**2).sum(1)
    assert g.integrate(np.exp(-r2 / 2)) == pytest.approx((2 * np.pi) ** 1.5, rel=1e-12)
    assert g.count == 24 * 12 * 24


def test_spherical_grid_panels_and_errors():
    g = quad.spherical_grid(8, 6, 12, 4.0, panels=[1.0, 2.0])
    assert g.radii.size == 24
    assert g.weights.sum() == pytest.approx(4 / 3 * np.pi * 64, rel=1e-12)
    with pytest.raises(UsageError):
        quad.spherical_grid(4, 4, 4, 0.0)


def test_shell_directions_cover_sphere():
    d, w = quad.shell_directions(10, 20)
    assert np.allclose(np.linalg.norm(d, axis=1), 1.0)
    assert w.sum() == pytest.approx(4 * np.pi, rel=1e-13)
    # second moments of the unit sphere: 4 pi / 3
    assert np.allclose((d * w[:, None]).T @ d, 4 * np.pi / 3 * np.eye(3), atol=1e-12)


def test_rest_frame_grid_invariant_measure():
    # integral of dp/p0 of a function of the rest-frame energy is frame independent
    c, T = 5.0, 1.0
    f = lambda p, u: np.exp(-(np.sqrt(c * c + (p * p).sum(1)) * np.sqrt(c * c + u @ u) - p @ u) / (c * T) + c / T)
    u = np.array([2.0, -1.0, 0.5])
    g0 = quad.rest_frame_grid(np.zeros(3), c, T, 48, 12, 24)
    g1 = quad.rest_frame_grid(u, c, T, 48, 12, 24)
    e0 = np.sqrt(c * c + (g0.nodes**2).sum(1))
    e1 = np.sqrt(c * c + (g1.nodes**2).sum(1))
    a = g0.integrate(f(g0.nodes, np.zeros(3)) / e0)
    b = g1.integrate(f(g1.nodes, u) / e1)
    assert b == pytest.approx(a, rel=1e-11)


def test_gauss_hermite_grid_moments():
    g = quad.gauss_hermite_grid([1.0, 0.0, -2.0], 0.7, n=12)
    d = g.nodes - np.array([1.0, 0.0, -2.0])
    gauss = np.exp(-(d * d).sum(1) / 1.4)
    assert g.integrate(gauss) == pytest.approx((1.4 * np.pi) ** 1.5, rel=1e-12)
