r"""Null space of the linearized collision operator.

The null space is :math:`\mathcal N_c = \mathrm{span}\{1, p, p^0\}\sqrt{M_c}`,
represented through

.. math::
    \chi^c_0 = \mathfrak a_0\sqrt{M_c},\quad
    \chi^c_j = \frac{p_j-\mathfrak a_j}{\mathfrak b_j}\sqrt{M_c},\quad
    \chi^c_4 = \frac{p^0/c + \lambda\cdot p + \mathfrak e}{\zeta}\sqrt{M_c},

with :math:`\mathfrak a_0 = (I^0)^{-1/2}`, :math:`\mathfrak a_j = T^{0j}/I^0`,
:math:`\mathfrak b_j^2 = T^{0jj} - (T^{0j})^2/I^0` and the solved
:math:`(\lambda, \mathfrak e)` of the orthogonality system.  The Newtonian
counterpart is

.. math::
    \chi_0 = \frac{\sqrt\mu}{\sqrt\rho},\quad
    \chi_j = \frac{p_j-\mathfrak u_j}{\sqrt{\rho\theta}}\sqrt\mu,\quad
    \chi_4 = \frac{1}{\sqrt{6\rho}}\Big(\frac{|p-\mathfrak u|^2}{\theta}-3\Big)\sqrt\mu .

For :math:`u \ne 0` the three :math:`\chi^c_j` are orthogonal to
:math:`\chi^c_0` and :math:`\chi^c_4` but not to each other, so projections
use the Gram matrix of the family.

Quantities that are :math:`O(\gamma^{-1})` are evaluated through
:math:`X = p^0/c - 1 = |p|^2/(c(p^0+c))` and :math:`\mathfrak e + 1`, which
keeps :math:`\chi^c_4` accurate for large ``c``.
"""

from dataclasses import dataclass
import math

import numpy as np

from . import specfun
from .equilibria import classical_maxwellian, log_juttner, moments
from .errors import AccuracyError, NumericError, UsageError
from .kinematics import energy

__all__ = [
    "BasisCoeffs",
    "Projection",
    "build_rel_basis",
    "eval_rel_basis",
    "eval_rel_family",
    "eval_cls_basis",
    "eval_cls_family",
    "orthogonality_system",
    "gram_matrix",
    "project_Pc",
    "basis_limit_gap",
]

_RADICAND_TOL = 1e-12


@dataclass(frozen=True)
class BasisCoeffs:
    r"""Coefficients of the relativistic null-space family.

    ``e1`` stores :math:`\mathfrak e + 1` (the small quantity) and ``e`` the
    coefficient itself.
    """

    a0: float
    a: np.ndarray
    b: np.ndarray
    lam: np.ndarray
    e: float
    e1: float
    zeta: float
    denominator: float


def _small_parts(state):
    c, T, g = state.c, state.T0, state.gamma
    u = state.u
    uu = float(u @ u)
    r = state.u0 / c
    eps = uu / (c * (state.u0 + c))  # r - 1
    w = uu / (c * c)  # r^2 - 1
    delta = specfun.gamma_delta(g) / g  # phi - 1
    return c, T, g, u, uu, r, eps, w, delta


def build_rel_basis(state):
    r"""Closed-form coefficients of :math:`\chi^c_\alpha` for a Juttner state.

    With :math:`\hat A = K_3/K_2 - 6/\gamma - K_2/K_3` and the denominator
    :math:`d = u^0/c - \hat A u^0|u|^2/(cT_0)`,

    .. math::
        \lambda_i = \frac{\hat A (u^0)^2u_i}{c^2T_0\,d},\qquad
        \mathfrak e = \frac{1}{d}\Big(\frac1\gamma - \frac{(u^0)^2}{\gamma T_0}\frac{K_3}{K_2}
        - \hat A\frac{|u|^2}{\gamma T_0}\Big).

    Raises
    ------
    NumericError
        If a squared normalization is below ``-1e-12`` relative.
    """
    c, T, g, u, uu, r, eps, w, delta = _small_parts(state)
    phi = state.phi
    ah = specfun.a_hat(g)
    den = r - ah * r * uu / T
    if not den > 0:
        raise NumericError("nonpositive denominator in the energy coefficient")
    lam = ah * r * r * u / (T * den)
    e = (1.0 / g - r * r * phi - ah * uu / (g * T)) / den
    # e + 1 without the O(1) cancellation: r - r^2 phi = -r (eps + delta + eps delta)
    e1 = (-r * (eps + delta + eps * delta) + 1.0 / g - ah * uu * (r + 1.0 / g) / T) / den
    mom = moments(state)
    I0 = mom.I[0]
    T0i = mom.T2[0, 1:]
    T0ij = mom.T3[0, 1:, 1:]
    a0 = 1.0 / math.sqrt(I0)
    a = T0i / I0
    b2 = np.diag(T0ij) - T0i**2 / I0
    if np.any(b2 < -_RADICAND_TOL * np.abs(np.diag(T0ij))):
        raise NumericError("negative radicand in momentum normalization")
    b = np.sqrt(np.maximum(b2, 0.0))
    z2 = _zeta_squared(state, lam, e1, mom)
    if z2 < 0:
        raise NumericError("negative radicand in energy normalization")
    return BasisCoeffs(a0, a, b, lam, e, e1, math.sqrt(z2), den)


def _x_moments(state):
    r"""Moments :math:`\langle X\rangle`, :math:`\langle Xp_i\rangle`, :math:`\langle X^2\rangle`
    of :math:`X = p^0/c-1` against :math:`M_c`, free of :math:`O(1)` cancellation."""
    c, T, g, u, uu, r, eps, w, delta = _small_parts(state)
    n, phi = state.n0, state.phi
    x1 = n * (r * eps + r * r * delta - 1.0 / g)
    xp = n * u * (r * (eps - delta) + 5.0 * phi * r * r / g + phi * w / g)
    x2 = n * (
        specfun.energy_variance(g) / g**2
        + r * eps * eps
        - 2.0 * w * delta
        + 3.0 * phi * eps * (r * r + r + 1.0) / g
        + 3.0 * phi * r * w / g
    )
    return x1, xp, x2


def _zeta_squared(state, lam, e1, mom):
    x1, xp, x2 = _x_moments(state)
    I0 = mom.I[0]
    T0i = mom.T2[0, 1:]
    T0ij = mom.T3[0, 1:, 1:]
    return float(x2 + 2.0 * lam @ xp + 2.0 * e1 * x1 + lam @ T0ij @ lam + 2.0 * e1 * lam @ T0i + e1 * e1 * I0)


def orthogonality_system(state, coeffs):
    """Residual of the 4x4 orthogonality system for ``(lambda, e)``, relative to its scale."""
    mom = moments(state)
    c = state.c
    I0 = mom.I[0]
    T0i = mom.T2[0, 1:]
    T00 = mom.T2[0, 0]
    T00i = mom.T3[0, 0, 1:]
    T0ij = mom.T3[0, 1:, 1:]
    a = coeffs.a
    A = np.zeros((4, 4))
    rhs = np.zeros(4)
    A[0, :3] = T0i
    A[0, 3] = I0
    rhs[0] = -T00 / c
    A[1:, :3] = T0ij - a[:, None] * T0i[None, :]
    A[1:, 3] = T0i - a * I0
    rhs[1:] = a * T00 / c - T00i / c
    x = np.concatenate([coeffs.lam, [coeffs.e]])
    res = A @ x - rhs
    scale = np.abs(A) @ np.abs(x) + np.abs(rhs)
    return float(np.max(np.abs(res) / scale))


def eval_rel_family(coeffs, state, p):
    """All five :math:`\\chi^c_\\alpha(p)`; returns shape ``(5, ...)``."""
    p = np.asarray(p, dtype=float)
    c = state.c
    sq = np.exp(0.5 * log_juttner(state, p))
    p2 = np.einsum("...i,...i->...", p, p)
    X = p2 / (c * (energy(p, c) + c))
    out = np.empty((5,) + sq.shape)
    out[0] = coeffs.a0 * sq
    for j in range(3):
        out[j + 1] = (p[..., j] - coeffs.a[j]) / coeffs.b[j] * sq
    out[4] = (X + p @ coeffs.lam + coeffs.e1) / coeffs.zeta * sq
    return out


def eval_rel_basis(coeffs, state, alpha, p):
    """Value of :math:`\\chi^c_\\alpha(p)` for ``alpha`` in 0..4."""
    if alpha not in range(5):
        raise UsageError("alpha must be in 0..4")
    return eval_rel_family(coeffs, state, p)[alpha]


def eval_cls_family(cls, p):
    """All five Newtonian :math:`\\chi_\\alpha(p)`; shape ``(5, ...)``."""
    p = np.asarray(p, dtype=float)
    sq = np.sqrt(classical_maxwellian(cls, p))
    d = p - cls.u
    rho, th = cls.rho, cls.theta
    out = np.empty((5,) + sq.shape)
    out[0] = sq / math.sqrt(rho)
    for j in range(3):
        out[j + 1] = d[..., j] / math.sqrt(rho * th) * sq
    out[4] = (np.einsum("...i,...i->...", d, d) / th - 3.0) / math.sqrt(6.0 * rho) * sq
    return out


def eval_cls_basis(cls, alpha, p):
    """Value of the Newtonian :math:`\\chi_\\alpha(p)` for ``alpha`` in 0..4."""
    if alpha not in range(5):
        raise UsageError("alpha must be in 0..4")
    return eval_cls_family(cls, p)[alpha]


def gram_matrix(values, weights):
    """Gram matrix :math:`\\sum_k w_k\\chi_\\alpha(p_k)\\chi_\\beta(p_k)` of sampled functions."""
    return (values * weights) @ values.T


@dataclass(frozen=True)
class Projection:
    """Result of :func:`project_Pc`.

    ``a``, ``b``, ``c`` are the coefficients of
    :math:`\\{a + b\\cdot p + c\\,p^0\\}\\sqrt{M_c}`; ``coords`` the coefficients
    in the :math:`\\chi^c` family; ``projected`` and ``residual`` are grid
    functions; ``gram_deviation`` is the largest entry of :math:`G - G_{exact}`
    on the diagonal, a resolution check.
    """

    a: float
    b: np.ndarray
    c: float
    coords: np.ndarray
    projected: np.ndarray
    residual: np.ndarray
    gram_deviation: float


def _monomial_map(coeffs, c):
    """Matrix ``R`` with ``chi = R @ (1, p1, p2, p3, p0) * sqrt(M)``."""
    R = np.zeros((5, 5))
    R[0, 0] = coeffs.a0
    for j in range(3):
        R[j + 1, 0] = -coeffs.a[j] / coeffs.b[j]
        R[j + 1, j + 1] = 1.0 / coeffs.b[j]
    # (p0/c + lam.p + e) / zeta
    R[4, 0] = coeffs.e / coeffs.zeta
    R[4, 1:4] = coeffs.lam / coeffs.zeta
    R[4, 4] = 1.0 / (c * coeffs.zeta)
    return R


def project_Pc(state, f, grid, coeffs=None, gram_tol=1e-4):
    r"""Orthogonal projection of a grid function onto :math:`\mathcal N_c`.

    Coordinates in the :math:`\chi^c` family solve :math:`G\alpha = (\langle\chi^c_\beta, f\rangle)`
    with the quadrature Gram matrix :math:`G`, then are mapped to
    :math:`(a_f, b_f, c_f)`.

    Raises
    ------
    AccuracyError
        When a diagonal Gram entry deviates from 1 by more than ``gram_tol``,
        which signals that ``grid`` does not resolve :math:`\sqrt{M_c}`.
    """
    coeffs = coeffs or build_rel_basis(state)
    chi = eval_rel_family(coeffs, state, grid.nodes)
    G = gram_matrix(chi, grid.weights)
    dev = float(np.max(np.abs(np.diag(G) - 1.0)))
    if dev > gram_tol:
        raise AccuracyError(f"grid does not resolve the null space (Gram deviation {dev:.2e})")
    f = np.asarray(f, dtype=float)
    rhs = chi @ (grid.weights * f)
    coords = np.linalg.solve(G, rhs)
    proj = coords @ chi
    mono = coords @ _monomial_map(coeffs, state.c)
    return Projection(mono[0], mono[1:4], mono[4], coords, proj, f - proj, dev)


def basis_limit_gap(states, cls, points, coeffs=None):
    r"""Sup-norm gaps :math:`\max_p|\chi^c_\alpha(p) - \chi_\alpha(p)|`.

    Parameters
    ----------
    states : sequence of RelFluidState
        States sharing primitive values with ``cls`` at increasing ``c``.
    cls : ClsFluidState
    points : array_like, shape (N, 3)

    Returns
    -------
    ndarray, shape (len(states), 5)
    """
    points = np.asarray(points, dtype=float)
    ref = eval_cls_family(cls, points)
    out = []
    for st in states:
        co = build_rel_basis(st)
        out.append(np.max(np.abs(eval_rel_family(co, st, points) - ref), axis=1))
    return np.array(out)
