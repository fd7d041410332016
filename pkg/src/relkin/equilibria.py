r"""Juttner and Maxwell equilibria, thermodynamic closures and moments.

Units are :math:`m_0 = k_B = 1`.  A relativistic state is described by the
number density :math:`n_0`, the spatial 4-velocity :math:`u` and the
temperature :math:`T_0`, with :math:`\gamma = c^2/T_0`,
:math:`u^0 = \sqrt{c^2+|u|^2}` and

.. math::
    P_0 = n_0T_0,\qquad e_0 = n_0c^2\frac{K_3(\gamma)}{K_2(\gamma)} - P_0,\qquad
    S = \ln\Big(\frac{4\pi c^3K_2(\gamma)}{\gamma n_0}\Big) + \gamma\frac{K_3(\gamma)}{K_2(\gamma)} .

The classical state is :math:`(\rho, \mathfrak u, \theta)` with
:math:`\mathcal P = \rho\theta` and
:math:`\eta = -\ln(A_0\rho\theta^{-3/2})`, :math:`A_0 = (2\pi)^{-3/2}e^{-5/2}`.
As :math:`c\to\infty` the relativistic entropy tends to :math:`\eta`.
"""

from dataclasses import dataclass
import math

import numpy as np

from . import specfun
from .errors import ConvergenceError, DomainError
from .kinematics import boost_from_velocity, boost_to_rest, energy
from .quadrature import rest_frame_grid

__all__ = [
    "RelFluidState",
    "ClsFluidState",
    "MomentSet",
    "ThermoDerivatives",
    "LOG_A0",
    "juttner",
    "log_juttner",
    "global_juttner",
    "classical_maxwellian",
    "weight_w",
    "moments",
    "third_moment_closed_form",
    "moments_by_quadrature",
    "sound_speed_rel",
    "sound_speed_cls",
    "thermo_derivatives",
    "rel_entropy",
    "cls_entropy",
    "state_from_PS",
    "state_from_Peta",
    "solve_gamma_PS",
    "juttner_log_derivative",
]

LOG_A0 = -1.5 * math.log(2.0 * math.pi) - 2.5
_METRIC = np.diag([-1.0, 1.0, 1.0, 1.0])


def rel_entropy(n0, T0, c):
    """Entropy per particle of a Juttner gas; vectorized over ``n0`` and ``T0``."""
    n0 = np.asarray(n0, dtype=float)
    gamma = c * c / np.asarray(T0, dtype=float)
    ke2 = specfun.bessel_ke(2, gamma)
    return np.log(4.0 * np.pi * c**3 * ke2 / (gamma * n0)) + specfun.gamma_delta(gamma)


def cls_entropy(rho, theta):
    """Classical entropy :math:`\\eta = -\\ln(A_0\\rho\\theta^{-3/2})`."""
    return -(LOG_A0 + np.log(rho) - 1.5 * np.log(theta))


@dataclass(frozen=True)
class RelFluidState:
    """Relativistic fluid state :math:`(n_0, u, T_0)` at light speed ``c``."""

    n0: float
    u: np.ndarray
    T0: float
    c: float

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float).reshape(3)
        object.__setattr__(self, "u", u)
        if not (self.n0 > 0 and self.T0 > 0 and self.c > 0):
            raise DomainError("n0, T0 and c must be positive")

    @property
    def gamma(self):
        return self.c * self.c / self.T0

    @property
    def u0(self):
        return math.sqrt(self.c * self.c + float(self.u @ self.u))

    @property
    def four_velocity(self):
        return np.concatenate([[self.u0], self.u])

    @property
    def phi(self):
        return specfun.ratio_k32(self.gamma)

    @property
    def P0(self):
        return self.n0 * self.T0

    @property
    def e0(self):
        return self.n0 * self.c**2 * self.phi - self.P0

    @property
    def S(self):
        return float(rel_entropy(self.n0, self.T0, self.c))

    @property
    def enthalpy(self):
        """Enthalpy per particle :math:`h = (e_0+P_0)/n_0`."""
        return self.c**2 * self.phi

    @property
    def c0(self):
        r"""Normalization :math:`n_0\gamma/(4\pi c^3 K_2(\gamma))` as a log, to avoid overflow."""
        return math.exp(self.log_c0)

    @property
    def log_c0(self):
        """Logarithm of the normalization, excluding the :math:`e^{\\gamma}` factor of ``1/K2``."""
        g = self.gamma
        return math.log(self.n0 * g / (4.0 * math.pi * self.c**3 * specfun.bessel_ke(2, g)))

    def with_c(self, c):
        return RelFluidState(self.n0, self.u, self.T0, c)


@dataclass(frozen=True)
class ClsFluidState:
    """Classical fluid state :math:`(\\rho, \\mathfrak u, \\theta)`."""

    rho: float
    u: np.ndarray
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "u", np.asarray(self.u, dtype=float).reshape(3))
        if not (self.rho > 0 and self.theta > 0):
            raise DomainError("rho and theta must be positive")

    @property
    def P(self):
        return self.rho * self.theta

    @property
    def eta(self):
        return float(cls_entropy(self.rho, self.theta))


@dataclass(frozen=True)
class MomentSet:
    """First, second and third moments of a Juttner distribution.

    ``I[a]`` is :math:`\\int p^a/p^0\\, M\\,dp`, ``T2[a, b]`` and ``T3[a, b, g]``
    the corresponding rank-2 and rank-3 tensors (contravariant indices).
    """

    I: np.ndarray
    T2: np.ndarray
    T3: np.ndarray


def log_juttner(state, p):
    r"""Logarithm of the Juttner density, grouped as :math:`(c^2 + u^\mu p_\mu)/T_0`.

    :math:`u^\mu p_\mu = -c\bar p^0` and :math:`c^2 - c\bar p^0 = -c|\bar p|^2/(\bar p^0 + c)`.
    """
    pbar, pbar0 = boost_to_rest(state.u, p, state.c)
    excess = np.einsum("...i,...i->...", pbar, pbar) / (pbar0 + state.c)
    return state.log_c0 - state.c * excess / state.T0


def juttner(state, p):
    r"""Local Juttner equilibrium

    .. math::
        M_c(p) = \frac{n_0\gamma}{4\pi c^3K_2(\gamma)}\exp\Big(\frac{u^\mu p_\mu}{T_0}\Big).

    Parameters
    ----------
    state : RelFluidState
    p : array_like, shape (..., 3)
    """
    return np.exp(log_juttner(state, p))


def global_juttner(n_M, T_M, c, p):
    r"""Global equilibrium :math:`J_c(p) = \frac{n_M\gamma_M}{4\pi c^3K_2(\gamma_M)}e^{-cp^0/T_M}`."""
    p = np.asarray(p, dtype=float)
    g = c * c / T_M
    p2 = np.einsum("...i,...i->...", p, p)
    excess = p2 / (energy(p, c) + c)
    lognorm = math.log(n_M * g / (4.0 * math.pi * c**3 * specfun.bessel_ke(2, g)))
    return np.exp(lognorm - c * excess / T_M)


def classical_maxwellian(state, p):
    r"""Maxwellian :math:`\mu = \rho(2\pi\theta)^{-3/2}e^{-|p-\mathfrak u|^2/(2\theta)}`."""
    d = np.asarray(p, dtype=float) - state.u
    d2 = np.einsum("...i,...i->...", d, d)
    return state.rho * (2.0 * np.pi * state.theta) ** -1.5 * np.exp(-d2 / (2.0 * state.theta))


def weight_w(ell, p):
    """Polynomial weight :math:`w_\\ell(p) = (1+|p|^2)^{\\ell/2}`."""
    p = np.asarray(p, dtype=float)
    return (1.0 + np.einsum("...i,...i->...", p, p)) ** (0.5 * ell)


def _rest_third_moment(state):
    n, c, g, phi = state.n0, state.c, state.gamma, state.phi
    t = np.zeros((4, 4, 4))
    t[0, 0, 0] = n * c * c * (3.0 * phi / g + 1.0)
    for i in range(1, 4):
        val = n * c * c * phi / g
        t[0, i, i] = t[i, 0, i] = t[i, i, 0] = val
    return t


def moments(state):
    r"""Moments of :math:`M_c` from the closed forms.

    .. math::
        I^\alpha = \frac{n_0u^\alpha}{c},\qquad
        T^{\alpha\beta} = \frac{e_0+P_0}{c^3}u^\alpha u^\beta + \frac{P_0}{c}g^{\alpha\beta},

    and :math:`T^{\alpha\beta\gamma}` is obtained by boosting the rest-frame
    tensor (nonzero entries :math:`\bar T^{000}` and :math:`\bar T^{0ii}`).
    """
    c = state.c
    U = state.four_velocity
    I = state.n0 * U / c
    T2 = (state.e0 + state.P0) / c**3 * np.outer(U, U) + state.P0 / c * _METRIC
    lam = boost_from_velocity(state.u, c).matrix
    T3 = np.einsum("ai,bj,gk,ijk->abg", lam, lam, lam, _rest_third_moment(state))
    return MomentSet(I, T2, T3)


def third_moment_closed_form(state):
    r"""Third moment from the explicit component formulas.

    With prefactor :math:`n_0/(c\gamma K_2)`:
    :math:`T^{000} \propto (3K_3+\gamma K_2)(u^0)^3 + 3K_3u^0|u|^2`,
    :math:`T^{00i} \propto (5K_3+\gamma K_2)(u^0)^2u_i + K_3|u|^2u_i`,
    :math:`T^{0ij} \propto (6K_3+\gamma K_2)u^0u_iu_j + c^2K_3u^0\delta_{ij}`,
    :math:`T^{ijk} \propto (6K_3+\gamma K_2)u_iu_ju_k + c^2K_3(u_i\delta_{jk}+u_j\delta_{ik}+u_k\delta_{ij})`.
    """
    n, c, g, phi = state.n0, state.c, state.gamma, state.phi
    u, u0 = state.u, state.u0
    uu = float(u @ u)
    # K3/K2 = phi, so n/(c g K2) (a K3 + g K2) = n/(c g) (a phi + g)
    pre = n / (c * g)
    d = np.eye(3)
    t = np.zeros((4, 4, 4))
    t000 = pre * ((3 * phi + g) * u0**3 + 3 * phi * u0 * uu)
    t00i = pre * ((5 * phi + g) * u0**2 * u + phi * uu * u)
    t0ij = pre * ((6 * phi + g) * u0 * np.outer(u, u) + c * c * phi * u0 * d)
    tijk = pre * (
        (6 * phi + g) * np.einsum("i,j,k->ijk", u, u, u)
        + c * c * phi * (np.einsum("i,jk->ijk", u, d) + np.einsum("j,ik->ijk", u, d) + np.einsum("k,ij->ijk", u, d))
    )
    t[0, 0, 0] = t000
    for i in range(3):
        t[0, 0, i + 1] = t[0, i + 1, 0] = t[i + 1, 0, 0] = t00i[i]
    for i in range(3):
        for j in range(3):
            t[0, i + 1, j + 1] = t[i + 1, 0, j + 1] = t[i + 1, j + 1, 0] = t0ij[i, j]
    t[1:, 1:, 1:] = tijk
    return t


def moments_by_quadrature(state, n_r=48, n_theta=12, n_phi=24):
    """Moments by direct quadrature of ``p^a p^b p^g / p0 * M`` (reference route)."""
    grid = rest_frame_grid(state.u, state.c, state.T0, n_r, n_theta, n_phi)
    p = grid.nodes
    p0 = energy(p, state.c)
    four = np.concatenate([p0[:, None], p], axis=1)
    f = juttner(state, p) * grid.weights / p0
    I = four.T @ f
    T2 = np.einsum("ka,kb,k->ab", four, four, f)
    T3 = np.einsum("ka,kb,kg,k->abg", four, four, four, f)
    return MomentSet(I, T2, T3)


def sound_speed_rel(state):
    r"""Relativistic sound speed :math:`a = \sqrt{c^2\,\partial P_0/\partial e_0|_S}`."""
    return math.sqrt(state.T0 * specfun.sound_ratio(state.gamma))


def sound_speed_cls(state):
    r"""Classical sound speed :math:`\sigma = \sqrt{5\theta/3}`."""
    return math.sqrt(5.0 * state.theta / 3.0)


@dataclass(frozen=True)
class ThermoDerivatives:
    """Partial derivatives of the closures with respect to (pressure, entropy).

    Relativistic fields are derivatives of ``n0`` and ``T0`` with respect to
    ``(P0, S)``; classical fields (prefix ``rho_``/``theta_``) are with respect
    to ``(P, eta)`` at the same numerical values of pressure and entropy.
    """

    n_P: float
    n_S: float
    T_P: float
    T_S: float
    n_PP: float
    n_PS: float
    n_SS: float
    T_PP: float
    T_PS: float
    T_SS: float
    rho_P: float
    rho_eta: float
    rho_PP: float
    rho_Peta: float
    rho_etaeta: float
    theta_P: float
    theta_eta: float
    theta_PP: float
    theta_Peta: float
    theta_etaeta: float


def thermo_derivatives(state, cls=None):
    r"""First and second derivatives of :math:`(n_0, T_0)` in :math:`(P_0, S)`.

    With :math:`\varphi` from :func:`relkin.specfun.varphi`,

    .. math::
        \frac{\partial n_0}{\partial P_0} = \frac{\varphi n_0}{P_0(\varphi - 1)},\qquad
        \frac{\partial n_0}{\partial S} = -\frac{n_0}{1-\varphi}.

    Second derivatives follow by implicit differentiation of the entropy
    relation in :math:`L = \ln\gamma`, for which
    :math:`\partial S/\partial L|_{P_0} = \varphi - 1`.

    Classical derivatives of :math:`\rho = (2\pi\mathcal P)^{3/5}e^{1-2\eta/5}`
    and :math:`\theta = \mathcal P/\rho` are evaluated at ``cls``, or at the
    classical state with the same pressure and entropy values when omitted.
    """
    P, n, T = state.P0, state.n0, state.T0
    g = state.gamma
    v = specfun.varphi(g)
    vL = g * specfun.varphi_prime(g)
    LP = 1.0 / (P * (v - 1.0))
    LS = 1.0 / (v - 1.0)
    LPP = -1.0 / (P * P * (v - 1.0)) - vL / (P * P * (v - 1.0) ** 3)
    LPS = -vL / (P * (v - 1.0) ** 3)
    LSS = -vL / (v - 1.0) ** 3
    lnP = 1.0 / P + LP
    lnS = LS
    lnPP = -1.0 / P**2 + LPP
    n_P = n * lnP
    n_S = n * lnS
    n_PP = n * (lnPP + lnP * lnP)
    n_PS = n * (LPS + lnP * lnS)
    n_SS = n * (LSS + lnS * lnS)
    T_P = -T * LP
    T_S = -T * LS
    T_PP = T * (LP * LP - LPP)
    T_PS = T * (LP * LS - LPS)
    T_SS = T * (LS * LS - LSS)
    if cls is None:
        cls = state_from_Peta(P, state.S)
    rho, Pc, th = cls.rho, cls.P, cls.theta
    return ThermoDerivatives(
        n_P, n_S, T_P, T_S, n_PP, n_PS, n_SS, T_PP, T_PS, T_SS,
        rho_P=3.0 / (5.0 * th),
        rho_eta=-0.4 * rho,
        rho_PP=-6.0 / (25.0 * Pc * th),
        rho_Peta=-6.0 / (25.0 * th),
        rho_etaeta=4.0 * rho / 25.0,
        theta_P=0.4 * th / Pc,
        theta_eta=0.4 * th,
        theta_PP=-0.24 * th / Pc**2,
        theta_Peta=0.16 * th / Pc,
        theta_etaeta=0.16 * th,
    )


def _entropy_residual(L, P, S, c):
    g = np.exp(L)
    ke2 = specfun.bessel_ke(2, g)
    return np.log(4.0 * np.pi * c**5 * ke2 / (P * g * g)) + specfun.gamma_delta(g) - S


def solve_gamma_PS(P0, S, c, tol=1e-13, maxiter=60):
    r"""Solve :math:`S(\gamma; P_0) = S` for :math:`\gamma`, vectorized.

    The residual is strictly decreasing in :math:`L = \ln\gamma` with slope
    :math:`\varphi - 1 < -1`.  The classical inverse provides the starting
    point and safeguarded Newton steps (bisection whenever a step leaves the
    running bracket inside :math:`\gamma\in[10^{-6}, 10^{12}]`) finish the
    solve.

    Raises
    ------
    ConvergenceError
        When the target lies outside the bracket or Newton fails.
    """
    P0 = np.atleast_1d(np.asarray(P0, dtype=float))
    S = np.atleast_1d(np.asarray(S, dtype=float))
    P0, S = np.broadcast_arrays(P0, S)
    lo = np.full(P0.shape, math.log(1e-6))
    hi = np.full(P0.shape, math.log(1e12))
    lo0, hi0 = lo.copy(), hi.copy()
    rho = (2.0 * np.pi * P0) ** 0.6 * np.exp(1.0 - 0.4 * S)
    L = np.clip(np.log(c * c * rho / P0), lo + 1e-3, hi - 1e-3)
    for it in range(maxiter):
        f = _entropy_residual(L, P0, S, c)
        lo = np.where(f > 0, L, lo)
        hi = np.where(f < 0, L, hi)
        slope = specfun.varphi(np.exp(L)) - 1.0
        step = -f / slope
        L_new = L + step
        out = (L_new < lo) | (L_new > hi)
        L_new = np.where(out, 0.5 * (lo + hi), L_new)
        done = np.abs(L_new - L) < tol * np.maximum(1.0, np.abs(L))
        L = L_new
        if np.all(done):
            break
    else:
        raise ConvergenceError("Newton iteration for gamma did not converge", {"iterations": maxiter})
    edge = (L - lo0 < 1e-6) | (hi0 - L < 1e-6)
    if np.any(edge):
        bad = np.flatnonzero(edge)
        raise ConvergenceError(
            "no bracket for gamma in [1e-6, 1e12]",
            {"P0": P0.ravel()[bad].tolist(), "S": S.ravel()[bad].tolist(), "c": c},
        )
    return np.exp(L)


def state_from_PS(P0, S, c, u=(0.0, 0.0, 0.0)):
    """Relativistic state with prescribed pressure and entropy.

    Parameters
    ----------
    P0, S : float
        Pressure and entropy per particle.
    c : float
        Light speed.
    u : array_like, optional
        Spatial 4-velocity carried into the returned state.
    """
    g = float(solve_gamma_PS(P0, S, c)[0])
    T = c * c / g
    return RelFluidState(P0 / T, np.asarray(u, dtype=float), T, c)


def state_from_Peta(P, eta, u=(0.0, 0.0, 0.0)):
    r"""Classical state from pressure and entropy: :math:`\rho = (2\pi\mathcal P)^{3/5}e^{1-2\eta/5}`."""
    rho = (2.0 * math.pi * P) ** 0.6 * math.exp(1.0 - 0.4 * eta)
    return ClsFluidState(rho, np.asarray(u, dtype=float), P / rho)


def juttner_log_derivative(state, p, dn0, du, dT0):
    r"""Directional logarithmic derivative :math:`\partial M_c / M_c`.

    For a derivative :math:`\partial` acting on the fields :math:`(n_0, u, T_0)`,

    .. math::
        \frac{\partial M_c}{M_c} = \frac{\partial n_0}{n_0} - 3\frac{\partial T_0}{T_0}
        + \frac{\partial T_0}{T_0^2}\Big(u^0p^0 - c^2\frac{K_1}{K_2}\Big)
        - \frac{\partial T_0}{T_0^2}\,u\cdot p
        + \frac{1}{T_0}\Big(p\cdot\partial u - \frac{u\cdot\partial u}{u^0}p^0\Big).

    Parameters
    ----------
    state : RelFluidState
    p : array_like, shape (..., 3)
    dn0, dT0 : float
        Derivatives of density and temperature.
    du : array_like, shape (3,)
        Derivative of the spatial 4-velocity.
    """
    p = np.asarray(p, dtype=float)
    du = np.asarray(du, dtype=float).reshape(3)
    c, T, u, u0 = state.c, state.T0, state.u, state.u0
    p0 = energy(p, c)
    r = specfun.ratio_k12(state.gamma)
    # u0 p0 - c^2 r, split so the O(c^2) parts cancel analytically
    # u0 p0 - c^2 = (u0 - c) p0 + c (p0 - c); c^2 (1 - r) is O(T)
    p2 = np.einsum("...i,...i->...", p, p)
    uu = float(u @ u)
    energy_term = (uu / (u0 + c)) * p0 + c * p2 / (p0 + c) + c * c * (1.0 - r)
    out = dn0 / state.n0 - 3.0 * dT0 / T + dT0 / T**2 * (energy_term - p @ u)
    out = out + (p @ du - (u @ du) / u0 * p0) / T
    return out
