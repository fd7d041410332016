r"""Special-relativistic two-body kinematics with unit rest mass.

Momenta are spatial 3-vectors ``p`` with energy :math:`p^0 = \sqrt{c^2+|p|^2}`.
Functions accept arrays of shape ``(..., 3)`` and broadcast over the leading
axes.  Invariants are evaluated in cancellation-free forms, e.g.

.. math::
    g^2 = |p-q|^2 - (p^0-q^0)^2, \qquad p^0 - q^0 = \frac{|p|^2-|q|^2}{p^0+q^0},

which equals :math:`2(p^0q^0 - p\cdot q - c^2)` but stays accurate when
:math:`c \gg |p|`.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NumericError, UsageError

__all__ = [
    "FourMomentum",
    "BoostMatrix",
    "energy",
    "minkowski_dot",
    "rel_momentum_g",
    "total_s",
    "moller_velocity",
    "com_outgoing",
    "scattering_angle",
    "boost_from_velocity",
    "boost_momentum",
    "boost_to_rest",
    "boost_jacobian",
    "large_c_guard",
]

_RADICAND_TOL = 1e-12


def energy(p, c):
    """Energy :math:`p^0 = \\sqrt{c^2 + |p|^2}` of momenta ``p`` (shape ``(..., 3)``)."""
    p = np.asarray(p, dtype=float)
    return np.sqrt(c * c + np.einsum("...i,...i->...", p, p))


@dataclass(frozen=True)
class FourMomentum:
    """Spatial momentum with light speed; the energy component is derived.

    ``p`` may carry leading batch axes, shape ``(..., 3)``.
    """

    p: np.ndarray
    c: float

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.shape[-1:] != (3,):
            raise UsageError("momentum must have trailing dimension 3")
        if not self.c > 0:
            raise UsageError("light speed must be positive")
        object.__setattr__(self, "p", p)

    @property
    def p0(self):
        return energy(self.p, self.c)

    @property
    def four(self):
        """Contravariant components :math:`(p^0, p^1, p^2, p^3)`."""
        return np.concatenate([self.p0[..., None], self.p], axis=-1)


def _momenta(P, Q):
    if isinstance(P, FourMomentum) and isinstance(Q, FourMomentum):
        if P.c != Q.c:
            raise UsageError("four-momenta carry different light speeds")
        return P.p, Q.p, P.c
    raise UsageError("expected FourMomentum arguments")


def minkowski_dot(P, Q):
    """Minkowski product :math:`p^\\mu q_\\mu = -p^0 q^0 + p\\cdot q`."""
    p, q, c = _momenta(P, Q)
    return -energy(p, c) * energy(q, c) + np.einsum("...i,...i->...", p, q)


def _g_squared(p, q, c):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    d = p - q
    d2 = np.einsum("...i,...i->...", d, d)
    p0 = energy(p, c)
    q0 = energy(q, c)
    dp0 = np.einsum("...i,...i->...", d, p + q) / (p0 + q0)
    return d2 - dp0 * dp0, d2


def rel_momentum_g(p, q, c):
    r"""Relative momentum :math:`g = \sqrt{2(p^0q^0 - p\cdot q - c^2)}`.

    Raises :class:`NumericError` if the radicand is below ``-1e-12`` relative
    to :math:`|p-q|^2`; smaller negative round-off is clamped to zero.
    """
    g2, d2 = _g_squared(p, q, c)
    if np.any(g2 < -_RADICAND_TOL * np.maximum(d2, 1.0)):
        raise NumericError("negative radicand in relative momentum")
    return np.sqrt(np.maximum(g2, 0.0))


def total_s(p, q, c):
    """Total energy invariant :math:`s = g^2 + 4c^2`."""
    g2, d2 = _g_squared(p, q, c)
    return np.maximum(g2, 0.0) + 4.0 * c * c


def moller_velocity(p, q, c):
    r"""Moller velocity :math:`v_\phi = \frac{c}{4}\frac{g\sqrt{s}}{p^0 q^0}`."""
    g = rel_momentum_g(p, q, c)
    s = g * g + 4.0 * c * c
    return 0.25 * c * g * np.sqrt(s) / (energy(p, c) * energy(q, c))


def com_outgoing(p, q, omega, c):
    r"""Post-collision momenta in the centre-of-momentum parametrization.

    .. math::
        p' = \tfrac12(p+q) + \tfrac12 g\Big(\omega + (\gamma_0-1)(p+q)
             \frac{(p+q)\cdot\omega}{|p+q|^2}\Big), \qquad
        p'^0 = \tfrac12(p^0+q^0) + \frac{g}{2\sqrt s}(p+q)\cdot\omega,

    with :math:`\gamma_0 = (p^0+q^0)/\sqrt s` and :math:`q'` obtained by the
    opposite sign.  When :math:`p+q=0` the projection term is taken as zero.

    Returns
    -------
    p_out, q_out, p0_out, q0_out : ndarray
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    omega = np.asarray(omega, dtype=float)
    norm = np.sqrt(np.einsum("...i,...i->...", omega, omega))
    if np.any(np.abs(norm - 1.0) > 1e-10):
        raise UsageError("omega must be a unit vector")
    g = rel_momentum_g(p, q, c)
    s = g * g + 4.0 * c * c
    rs = np.sqrt(s)
    p0 = energy(p, c)
    q0 = energy(q, c)
    tot = p + q
    tdw = np.einsum("...i,...i->...", tot, omega)
    # (gamma0 - 1)/|p+q|^2 = 1/(sqrt(s) (p0+q0+sqrt(s))), finite at p+q=0
    coef = 1.0 / (rs * (p0 + q0 + rs))
    shift = 0.5 * g[..., None] * (omega + (coef * tdw)[..., None] * tot)
    half = 0.5 * tot
    e_shift = 0.5 * g / rs * tdw
    return half + shift, half - shift, 0.5 * (p0 + q0) + e_shift, 0.5 * (p0 + q0) - e_shift


def scattering_angle(p, q, p_out, q_out, c):
    r"""Scattering angle :math:`\vartheta` with
    :math:`\cos\vartheta = (p^\mu-q^\mu)(p'_\mu-q'_\mu)/g^2`, clipped to ``[-1, 1]``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    a = p - q
    b = np.asarray(p_out, dtype=float) - np.asarray(q_out, dtype=float)
    a0 = energy(p, c) - energy(q, c)
    b0 = energy(p_out, c) - energy(q_out, c)
    g2 = rel_momentum_g(p, q, c) ** 2
    cos = (-a0 * b0 + np.einsum("...i,...i->...", a, b)) / g2
    return np.arccos(np.clip(cos, -1.0, 1.0))


@dataclass(frozen=True)
class BoostMatrix:
    r"""Lorentz boost to the rest frame of the 4-velocity :math:`(u^0, u)`.

    ``matrix`` maps rest-frame components to lab components and ``inverse``
    maps lab momenta to barred (rest-frame) momenta.
    """

    matrix: np.ndarray
    inverse: np.ndarray
    u: np.ndarray
    c: float

    @property
    def u0(self):
        return float(np.sqrt(self.c**2 + self.u @ self.u))


def boost_from_velocity(u, c):
    r"""Boost :math:`\bar\Lambda` built from the spatial 4-velocity ``u``.

    With :math:`\tilde r = u^0/c` and :math:`v = c u / u^0`,

    .. math::
        \bar\Lambda = \begin{pmatrix} \tilde r & \tilde r v^t/c \\
        \tilde r v/c & I + (\tilde r - 1) v v^t/|v|^2 \end{pmatrix},

    and the inverse flips the sign of the off-diagonal blocks.  The factor
    :math:`(\tilde r-1)/|v|^2` is evaluated as :math:`\tilde r^2/(c^2(\tilde r+1))`.
    """
    u = np.asarray(u, dtype=float).reshape(3)
    u0 = np.sqrt(c * c + u @ u)
    rt = u0 / c
    v = c * u / u0
    k = rt * rt / (c * c * (rt + 1.0))
    spatial = np.eye(3) + k * np.outer(v, v)
    lam = np.empty((4, 4))
    lam[0, 0] = rt
    lam[0, 1:] = rt * v / c
    lam[1:, 0] = rt * v / c
    lam[1:, 1:] = spatial
    inv = lam.copy()
    inv[0, 1:] *= -1.0
    inv[1:, 0] *= -1.0
    return BoostMatrix(lam, inv, u.copy(), float(c))


def boost_to_rest(u, p, c):
    r"""Barred momentum :math:`\bar p` (spatial part) and :math:`\bar p^0`.

    .. math::
        \bar p^0 = \frac{u^0p^0 - u\cdot p}{c},\qquad
        \bar p = p + \frac{u\,(u\cdot p)}{c(u^0+c)} - \frac{u p^0}{c}.

    Works on batches ``p`` of shape ``(..., 3)``.
    """
    u = np.asarray(u, dtype=float).reshape(3)
    p = np.asarray(p, dtype=float)
    u0 = np.sqrt(c * c + u @ u)
    p0 = energy(p, c)
    up = p @ u
    pbar0 = (u0 * p0 - up) / c
    pbar = p + (up / (c * (u0 + c)))[..., None] * u - (p0 / c)[..., None] * u
    return pbar, pbar0


def boost_momentum(boost, P):
    """Apply the inverse boost to a :class:`FourMomentum`, giving barred momentum."""
    if boost.c != P.c:
        raise UsageError("boost and momentum carry different light speeds")
    pbar, _ = boost_to_rest(boost.u, P.p, P.c)
    return FourMomentum(pbar, P.c)


def boost_jacobian(u, p, c):
    r"""Jacobian :math:`\partial\bar p_i/\partial p_j` of the rest-frame map.

    .. math::
        \delta_{ij} + \Big(\frac{u^0}{c}-1\Big)\frac{u_iu_j}{|u|^2} - \frac{u_ip_j}{cp^0}
    """
    u = np.asarray(u, dtype=float).reshape(3)
    p = np.asarray(p, dtype=float)
    u0 = np.sqrt(c * c + u @ u)
    p0 = energy(p, c)
    base = np.eye(3) + np.outer(u, u) / (c * (u0 + c))
    return base - u[:, None] * (p / (c * p0)[..., None])[..., None, :]


def large_c_guard(c, u, factor=4.0):
    """True when ``c >= factor * max|u|``, the regime of the large-c estimates."""
    u = np.asarray(u, dtype=float).reshape(-1, 3)
    return bool(c >= factor * np.max(np.linalg.norm(u, axis=1)))
