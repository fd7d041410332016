"""Momentum-space quadrature rules.

Spherical product rules (Gauss-Legendre in radius and in the polar cosine,
trapezoid in azimuth) are the workhorse.  For a fluid moving with 4-velocity
``u`` the rule is laid out in the rest frame and pushed forward to the lab
frame with the invariance of ``dp / p0``, so a Juttner equilibrium is always
integrated around its own peak.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import UsageError
from .kinematics import boost_from_velocity, energy

__all__ = [
    "MomentumGrid",
    "gauss_legendre",
    "spherical_grid",
    "rest_frame_grid",
    "gauss_hermite_grid",
    "shell_directions",
]


@lru_cache(maxsize=None)
def _leggauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n, a, b):
    """Gauss-Legendre nodes and weights on ``[a, b]``."""
    x, w = _leggauss(n)
    half = 0.5 * (b - a)
    return half * x + 0.5 * (a + b), half * w


@dataclass(frozen=True)
class MomentumGrid:
    """Quadrature nodes ``p_k`` (shape ``(N, 3)``) with positive weights ``w_k``.

    ``shape`` records ``(n_r, n_theta, n_phi)`` for tensor grids, with nodes
    ordered radius-major.  ``radii`` are the radial nodes.
    """

    nodes: np.ndarray
    weights: np.ndarray
    shape: tuple = ()
    radii: np.ndarray = field(default=None)
    radius: float = float("nan")

    @property
    def count(self):
        return self.weights.size

    def integrate(self, values):
        """Weighted sum over the last axis of ``values``."""
        return np.asarray(values) @ self.weights


@lru_cache(maxsize=None)
def _angular(n_theta, n_phi):
    ct, wt = _leggauss(n_theta)
    ph = 2.0 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    st = np.sqrt(1.0 - ct * ct)
    dirs = np.stack(
        [
            (st[:, None] * np.cos(ph)[None, :]).ravel(),
            (st[:, None] * np.sin(ph)[None, :]).ravel(),
            np.repeat(ct, n_phi),
        ],
        axis=1,
    )
    w = np.repeat(wt, n_phi) * (2.0 * np.pi / n_phi)
    return dirs, w


def shell_directions(n_theta, n_phi):
    """Unit directions and solid-angle weights (summing to 4 pi)."""
    dirs, w = _angular(n_theta, n_phi)
    return dirs.copy(), w.copy()


def spherical_grid(n_r, n_theta, n_phi, radius, panels=None):
    """Tensor spherical rule on the ball ``|p| <= radius``.

    Parameters
    ----------
    n_r : int
        Radial Gauss-Legendre nodes (per panel when ``panels`` is given).
    n_theta, n_phi : int
        Polar (Gauss-Legendre in cos) and azimuthal (midpoint) counts.
    radius : float
        Outer radius.
    panels : sequence of float, optional
        Interior radial breakpoints.
    """
    if radius <= 0:
        raise UsageError("radius must be positive")
    edges = [0.0] + sorted(panels or []) + [radius]
    rs, wr = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        r, w = gauss_legendre(n_r, a, b)
        rs.append(r)
        wr.append(w)
    r = np.concatenate(rs)
    wr = np.concatenate(wr) * r * r
    dirs, wa = _angular(n_theta, n_phi)
    nodes = (r[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
    weights = (wr[:, None] * wa[None, :]).ravel()
    return MomentumGrid(nodes, weights, (r.size, n_theta, n_phi), r, float(radius))


def juttner_radius(c, T0, decades=18.0):
    """Rest-frame radius beyond which a Juttner density is below 10**-decades of its peak."""
    drop = decades * np.log(10.0)
    e_excess = drop * T0 / c  # p0 - c at the cut
    return float(np.sqrt(e_excess * (e_excess + 2.0 * c)))


def rest_frame_grid(u, c, T0, n_r=48, n_theta=16, n_phi=32, radius=None):
    """Spherical rule centred on the rest frame of ``u``, mapped to lab momenta.

    Lab weights carry the factor ``p0 / pbar0`` from the invariance of
    ``dp / p0``.
    """
    if radius is None:
        radius = juttner_radius(c, T0)
    grid = spherical_grid(n_r, n_theta, n_phi, radius)
    u = np.asarray(u, dtype=float).reshape(3)
    if not np.any(u):
        return grid
    lam = boost_from_velocity(u, c).matrix
    pbar = grid.nodes
    pbar0 = energy(pbar, c)
    four = np.concatenate([pbar0[:, None], pbar], axis=1) @ lam.T
    p = four[:, 1:]
    w = grid.weights * four[:, 0] / pbar0
    return MomentumGrid(p, w, grid.shape, grid.radii, grid.radius)


def gauss_hermite_grid(center, theta, n=24):
    """Tensor Gauss-Hermite rule for integrals against a Gaussian of variance ``theta``.

    Returns nodes and weights such that ``sum w f(p)`` approximates
    ``integral f(p) dp`` for ``f`` carrying its own Gaussian factor; weights
    include ``exp(+|x|^2)`` so any integrand can be supplied.
    """
    x, w = np.polynomial.hermite.hermgauss(n)
    s = np.sqrt(2.0 * theta)
    xs = x * s
    ws = w * np.exp(x * x) * s
    grid = np.stack(np.meshgrid(xs, xs, xs, indexing="ij"), axis=-1).reshape(-1, 3)
    wt = (ws[:, None, None] * ws[None, :, None] * ws[None, None, :]).ravel()
    return MomentumGrid(grid + np.asarray(center, dtype=float), wt, (n, n, n))
