r"""Coefficient matrices of the first-order Hilbert system and of the Euler systems.

The first Hilbert correction :math:`U = (a, b, c)` satisfies the linear
symmetric system

.. math::
    A_0\partial_tU + \sum_i A_i\partial_iU + BU = S,

where :math:`A_0 = \int M_c\,v\otimes v\,dp` and
:math:`A_i = c\int \frac{p_i}{p^0}M_c\,v\otimes v\,dp` with
:math:`v = (1, p, p^0/c)`, and :math:`B = \partial_tA_0 + \sum_i\partial_iA_i`.
The relativistic Euler equations in :math:`V = (P_0, u, S)` and the classical
ones in :math:`W = (\mathcal P, \mathfrak u, \eta)` are symmetric hyperbolic
with matrices :math:`B_\alpha` and :math:`D_\alpha` respectively.

The entry functions accept any scalar type supporting ``+ - * /`` (floats or
``mpmath.mpf``), so the conditioning of :math:`A_0` at large ``c`` can be
studied in extended precision.
"""

from dataclasses import dataclass

import numpy as np

from . import specfun
from .equilibria import sound_speed_cls, sound_speed_rel

__all__ = [
    "CoeffMatrices",
    "hilbert_A0",
    "hilbert_Ai",
    "hilbert_aux",
    "assemble_hilbert_matrices",
    "det_A0_closed_form",
    "leading_minor_bounds",
    "n_dP_dn",
    "n_dP_dn_from_closure",
    "zeta0_aux",
    "assemble_rel_euler_matrices",
    "assemble_cls_euler_matrices",
    "rel_euler_blocks",
    "b0_trace_det_closed_form",
]


@dataclass(frozen=True)
class CoeffMatrices:
    """Matrices :math:`A_0`, :math:`A_1..A_3` (shape ``(3, 5, 5)``), :math:`B` and :math:`h, h_1, h_2`."""

    A0: np.ndarray
    A: np.ndarray
    B: np.ndarray
    h: float
    h1: float
    h2: float


def hilbert_aux(n0, T0, c, phi):
    r"""Auxiliaries :math:`h = (e_0+P_0)/n_0`, :math:`h_1 = n_0(6\phi+\gamma)/\gamma`,
    :math:`h_2 = n_0\phi/\gamma` for any scalar type."""
    gamma = c * c / T0
    return c * c * phi, n0 * (6 * phi + gamma) / gamma, n0 * phi / gamma


def _matrix(rows):
    return [list(r) for r in rows]


def hilbert_A0(n0, u, T0, c, phi):
    r"""Entries of :math:`A_0` as a nested list, for generic scalars.

    .. math::
        A_0 = \begin{pmatrix}
        \frac{n_0u^0}{c} & \frac{n_0u^0h}{c^3}u^t & \frac{e_0(u^0)^2+P_0|u|^2}{c^4}\\
        \cdot & (\frac{h_1}{c}u\otimes u + ch_2I)u^0 & (\frac{h_1}{c^2}(u^0)^2-h_2)u\\
        \cdot & \cdot & (\frac{h_1}{c^3}(u^0)^2 - \frac{3h_2}{c})u^0
        \end{pmatrix}

    Parameters
    ----------
    n0, T0, c, phi : scalar
        ``phi`` is :math:`K_3(\\gamma)/K_2(\\gamma)` in the same scalar type.
    u : sequence of 3 scalars
    """
    h, h1, h2 = hilbert_aux(n0, T0, c, phi)
    uu = u[0] * u[0] + u[1] * u[1] + u[2] * u[2]
    u0 = (c * c + uu) ** 0.5 if isinstance(c, float) else _sqrt(c * c + uu)
    P = n0 * T0
    e = n0 * c * c * phi - P
    A = [[0] * 5 for _ in range(5)]
    A[0][0] = n0 * u0 / c
    for j in range(3):
        A[0][j + 1] = A[j + 1][0] = n0 * u0 * h * u[j] / c**3
    A[0][4] = A[4][0] = (e * u0 * u0 + P * uu) / c**4
    for j in range(3):
        for k in range(3):
            A[j + 1][k + 1] = (h1 / c * u[j] * u[k] + (c * h2 if j == k else 0)) * u0
        A[j + 1][4] = A[4][j + 1] = (h1 / c**2 * u0 * u0 - h2) * u[j]
    A[4][4] = (h1 / c**3 * u0 * u0 - 3 * h2 / c) * u0
    return A


def _sqrt(x):
    return x.sqrt() if hasattr(x, "sqrt") else type(x)(x) ** 0.5


def hilbert_Ai(n0, u, T0, c, phi, i):
    r"""Entries of the flux matrix :math:`A_i` (``i`` in 0..2), generic scalars.

    .. math::
        A_i = \begin{pmatrix}
        n_0u_i & \frac{n_0h}{c^2}u_iu^t + P_0e_i^t & \frac{n_0hu^0u_i}{c^3}\\
        \cdot & h_1u_iu\otimes u + c^2h_2(u_iI + \tilde A_i) & (\frac{h_1}{c}u_iu + ch_2e_i)u^0\\
        \cdot & \cdot & (\frac{h_1}{c^2}(u^0)^2 - h_2)u_i
        \end{pmatrix},

    with :math:`(\tilde A_i)_{jk} = \delta_{ij}u_k + \delta_{ik}u_j`.
    """
    h, h1, h2 = hilbert_aux(n0, T0, c, phi)
    uu = u[0] * u[0] + u[1] * u[1] + u[2] * u[2]
    u0 = (c * c + uu) ** 0.5 if isinstance(c, float) else _sqrt(c * c + uu)
    P = n0 * T0
    ui = u[i]
    A = [[0] * 5 for _ in range(5)]
    A[0][0] = n0 * ui
    for j in range(3):
        A[0][j + 1] = A[j + 1][0] = n0 * h / c**2 * ui * u[j] + (P if j == i else 0)
    A[0][4] = A[4][0] = n0 * h * u0 * ui / c**3
    for j in range(3):
        for k in range(3):
            tilde = (u[k] if j == i else 0) + (u[j] if k == i else 0)
            A[j + 1][k + 1] = h1 * ui * u[j] * u[k] + c * c * h2 * ((ui if j == k else 0) + tilde)
        A[j + 1][4] = A[4][j + 1] = (h1 / c * ui * u[j] + (c * h2 if j == i else 0)) * u0
    A[4][4] = (h1 / c**2 * u0 * u0 - h2) * ui
    return A


def _state_matrices(state):
    phi = state.phi
    u = [float(x) for x in state.u]
    A0 = np.array(hilbert_A0(state.n0, u, state.T0, state.c, phi), dtype=float)
    A = np.array([hilbert_Ai(state.n0, u, state.T0, state.c, phi, i) for i in range(3)], dtype=float)
    return A0, A


_FD4 = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
_FD4_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])


def assemble_hilbert_matrices(state, field=None, t=0.0, x=(0.0, 0.0, 0.0), step=1e-3):
    r"""Assemble :math:`A_0`, :math:`A_i` and :math:`B = \partial_tA_0 + \sum_i\partial_iA_i`.

    Parameters
    ----------
    state : RelFluidState
        State at the evaluation point.
    field : callable, optional
        ``field(t, x) -> RelFluidState``; derivatives in :math:`B` use
        fourth-order central differences with spacing ``step``.  Without a
        field the state is taken as constant and :math:`B = 0`.
    """
    A0, A = _state_matrices(state)
    h, h1, h2 = hilbert_aux(state.n0, state.T0, state.c, state.phi)
    B = np.zeros((5, 5))
    if field is not None:
        x = np.asarray(x, dtype=float)
        for w, off in zip(_FD4, _FD4_OFFSETS):
            B += w / step * _state_matrices(field(t + off * step, x))[0]
            for i in range(3):
                xs = x.copy()
                xs[i] += off * step
                B += w / step * _state_matrices(field(t, xs))[1][i]
    return CoeffMatrices(A0, A, B, h, h1, h2)


def det_A0_closed_form(state):
    r"""Closed-form determinant

    .. math::
        \det A_0 = \Big(\frac{n_0u^0}{c}\Big)^5\Big(\frac{c^2\phi}{\gamma}\Big)^3(u^0)^{-2}
        \Big\{|u|^2\mathfrak h + c^2\Big(\Psi - \frac1{\gamma^2} - \frac\phi\gamma\Big)\Big\},

    with :math:`\Psi = 1 + 6\phi/\gamma - \phi^2` and
    :math:`\Psi - 1/\gamma^2 - \phi/\gamma = -\varphi/\gamma^2` evaluated
    without cancellation.
    """
    n, c, g, phi = state.n0, state.c, state.gamma, state.phi
    u0 = state.u0
    uu = float(state.u @ state.u)
    brace = uu * specfun.hfrak(g) - c * c * specfun.varphi(g) / g**2
    return (n * u0 / c) ** 5 * (c * c * phi / g) ** 3 / u0**2 * brace


def leading_minor_bounds(state):
    r"""Lower bounds :math:`(n_0u^0/c)^k(c^2\phi/\gamma)^{k-1}` for the leading minors of orders 1..4."""
    n, c, g, phi = state.n0, state.c, state.gamma, state.phi
    a = n * state.u0 / c
    b = c * c * phi / g
    return np.array([a, a**2 * b, a**3 * b**2, a**4 * b**3])


def n_dP_dn(state):
    r""":math:`n_0\,\partial P_0/\partial n_0|_S = a^2(e_0+P_0)/c^2 = n_0\phi\,a^2`."""
    a2 = state.T0 * specfun.sound_ratio(state.gamma)
    return state.n0 * state.phi * a2


def n_dP_dn_from_closure(state):
    r""":math:`n_0/(\partial n_0/\partial P_0|_S) = P_0(\varphi-1)/\varphi`, an independent route."""
    v = specfun.varphi(state.gamma)
    return state.P0 * (v - 1.0) / v


def zeta0_aux(state):
    r"""Auxiliary :math:`\zeta_0 = a(e_0+P_0)/c^2 = a\,n_0K_3/K_2` of the Euler symmetrizer."""
    return sound_speed_rel(state) * state.n0 * state.phi


def rel_euler_blocks(n0, u, u0, c, enth, ndp):
    r"""Relativistic Euler matrices from primitive scalars.

    .. math::
        B_0 = \begin{pmatrix} 1 & \kappa\frac{u^t}{(u^0)^2} & 0\\
        \kappa\frac{u}{(u^0)^2} & \frac{\kappa\,(e_0+P_0)}{c^2}\Big(I - \frac{u\otimes u}{(u^0)^2}\Big) & 0\\
        0 & 0 & u^0/c\end{pmatrix},\quad
        B_j = \begin{pmatrix} \frac{c}{u^0}u_j & \frac{c}{u^0}\kappa e_j^t & 0\\
        \frac{c}{u^0}\kappa e_j & \frac{\kappa(e_0+P_0)}{cu^0}\Big(u_jI - \frac{u\otimes u}{(u^0)^2}u_j\Big) & 0\\
        0 & 0 & u_j\end{pmatrix}

    with :math:`\kappa = n_0\partial P_0/\partial n_0|_S`.  The factor
    :math:`e_0+P_0` multiplies the whole middle block of :math:`B_j`.

    Parameters
    ----------
    n0 : float
    u : ndarray, shape (3,)
    u0, c : float
    enth : float
        :math:`e_0 + P_0`.
    ndp : float
        :math:`\kappa`.

    Returns
    -------
    ndarray, shape (4, 5, 5)
    """
    u = np.asarray(u, dtype=float)
    out = np.zeros((4, 5, 5))
    uu_outer = np.outer(u, u) / u0**2
    B0 = out[0]
    B0[0, 0] = 1.0
    B0[0, 1:4] = B0[1:4, 0] = ndp * u / u0**2
    B0[1:4, 1:4] = ndp * enth / c**2 * (np.eye(3) - uu_outer)
    B0[4, 4] = u0 / c
    for j in range(3):
        Bj = out[j + 1]
        Bj[0, 0] = c / u0 * u[j]
        Bj[0, j + 1] = Bj[j + 1, 0] = c / u0 * ndp
        Bj[1:4, 1:4] = ndp * enth / (c * u0) * (u[j] * np.eye(3) - uu_outer * u[j])
        Bj[4, 4] = u[j]
    return out


def assemble_rel_euler_matrices(state):
    """:math:`(B_0, B_1, B_2, B_3)` for a relativistic state; shape ``(4, 5, 5)``."""
    enth = state.e0 + state.P0
    return rel_euler_blocks(state.n0, state.u, state.u0, state.c, enth, n_dP_dn(state))


def assemble_cls_euler_matrices(state):
    r""":math:`(D_0, D_1, D_2, D_3)` for a classical state; shape ``(4, 5, 5)``.

    .. math::
        D_0 = \mathrm{diag}(1, \sigma^2\rho^2I, 1),\qquad
        D_j = \begin{pmatrix}\mathfrak u_j & \sigma^2\rho e_j^t & 0\\
        \sigma^2\rho e_j & \sigma^2\rho^2\mathfrak u_jI & 0\\ 0 & 0 & \mathfrak u_j\end{pmatrix}.
    """
    rho = state.rho
    s2 = sound_speed_cls(state) ** 2
    u = state.u
    out = np.zeros((4, 5, 5))
    out[0] = np.diag([1.0, s2 * rho**2, s2 * rho**2, s2 * rho**2, 1.0])
    for j in range(3):
        D = out[j + 1]
        D[0, 0] = u[j]
        D[0, j + 1] = D[j + 1, 0] = s2 * rho
        D[1:4, 1:4] = s2 * rho**2 * u[j] * np.eye(3)
        D[4, 4] = u[j]
    return out


def b0_trace_det_closed_form(state):
    r"""Closed-form trace and determinant of :math:`B_0`.

    .. math::
        \operatorname{tr}B_0 = 1 + \frac{u^0}{c} + \zeta_0^2\Big(2 + \frac{c^2}{(u^0)^2}\Big),\qquad
        \det B_0 = \frac{\zeta_0^6}{c(u^0)^3}\big(c^4 + |u|^2(c^2 - a^2)\big).
    """
    c, u0 = state.c, state.u0
    z2 = zeta0_aux(state) ** 2
    a2 = sound_speed_rel(state) ** 2
    uu = float(state.u @ state.u)
    tr = 1.0 + u0 / c + z2 * (2.0 + c * c / u0**2)
    det = z2**3 / (c * u0**3) * (c**4 + uu * (c * c - a2))
    return tr, det
