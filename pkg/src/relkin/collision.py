r"""Linearized relativistic collision kernels and their Newtonian counterparts.

The linearized operator is :math:`L_cf = \nu_cf - K_cf` with
:math:`K_c = K_{c2} - K_{c1}` and kernels

.. math::
    k_{c1}(p,q) = \frac{\pi c g\sqrt s}{p^0q^0}\sqrt{M_c(p)M_c(q)},\qquad
    k_{c2}(p,q) = \frac{c\,c_0\pi s^{3/2}}{4gp^0q^0}\big[J_1(\bar\ell,\bar j) + J_2(\bar\ell,\bar j)\big],

where :math:`\bar\ell = c(\bar p^0+\bar q^0)/(2T_0)`,
:math:`\bar j = c|\bar p\times\bar q|/(gT_0)` are built from rest-frame
momenta and

.. math::
    J_1 = \frac{\bar\ell}{D^2}\Big(1+\frac1D\Big)e^{-D},\qquad J_2 = \frac{e^{-D}}{D},\qquad
    D = \sqrt{\bar\ell^2-\bar j^2} = \frac{c\sqrt s\,|\bar p-\bar q|}{2gT_0}.

The factor :math:`c_0e^{-D}` is never formed from its pieces; instead

.. math::
    \gamma - D = -\frac{|\bar p-\bar q|^2/4 + c^2(\bar p^0-\bar q^0)^2/g^2}
    {T_0\,(1 + \sqrt s\,|\bar p-\bar q|/(2cg))},

which is free of cancellation for any ``c``.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import integrate

from . import specfun
from .equilibria import RelFluidState, log_juttner
from .errors import ConvergenceError, DomainError, UsageError
from .kinematics import boost_from_velocity, boost_to_rest, energy
from .quadrature import gauss_legendre, juttner_radius, rest_frame_grid, shell_directions

__all__ = [
    "KernelContext",
    "KernelEval",
    "QuadratureSpec",
    "kernel_kc1",
    "kernel_kc2",
    "kernel_kc2_oracle",
    "xi_kernel",
    "newtonian_k1",
    "newtonian_k2",
    "collision_frequency",
    "shell_integral",
    "weighted_kernel_integral",
    "kernel_l1_difference",
    "cbar1",
]

_SHELL_BREAKS = (1e-3, 1e-1, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0)


@dataclass(frozen=True)
class KernelContext:
    """Light speed, fluid state and the derived quantities every kernel needs.

    ``log_c0_scaled`` is :math:`\\ln(n_0\\gamma/(4\\pi c^3 K_2(\\gamma)e^{\\gamma}))`,
    i.e. :math:`\\ln c_0 - \\gamma`, which stays finite for large ``c``.
    """

    state: RelFluidState
    boost: object = field(init=False, repr=False)
    log_c0_scaled: float = field(init=False)

    def __post_init__(self):
        st = self.state
        object.__setattr__(self, "boost", boost_from_velocity(st.u, st.c))
        g = st.gamma
        val = math.log(st.n0 * g / (4.0 * math.pi * st.c**3 * specfun.bessel_ke(2, g)))
        object.__setattr__(self, "log_c0_scaled", val)

    @classmethod
    def from_values(cls, n0=1.0, u=(0.0, 0.0, 0.0), T0=1.0, c=1.0):
        return cls(RelFluidState(n0, np.asarray(u, dtype=float), T0, c))

    @property
    def c(self):
        return self.state.c

    @property
    def c0(self):
        """:math:`c_0 = n_0\\gamma/(4\\pi c^3K_2(\\gamma))`; overflows for very large ``c``."""
        return math.exp(self.log_c0_scaled + self.state.gamma)


@dataclass(frozen=True)
class KernelEval:
    """Kernel value with the barred diagnostics :math:`\\bar\\ell`, :math:`\\bar j`, :math:`\\bar p`, :math:`\\bar q`."""

    value: np.ndarray
    ell: np.ndarray
    j: np.ndarray
    pbar: np.ndarray
    qbar: np.ndarray
    D: np.ndarray


@dataclass(frozen=True)
class QuadratureSpec:
    """Resolution of the 3-D quadrature used for momentum integrals.

    ``method`` is ``"auto"``, ``"shell"`` (spherical shells centred at ``p``)
    or ``"rest"`` (spherical rule centred on the equilibrium).  ``rtol`` is
    the agreement required between the base and refined rules.
    """

    n_r: int = 16
    n_theta: int = 16
    n_phi: int = 32
    method: str = "auto"
    rtol: float = 1e-8
    max_refine: int = 3

    def refined(self):
        return QuadratureSpec(
            self.n_r + self.n_r // 2,
            self.n_theta + self.n_theta // 2,
            self.n_phi + self.n_phi // 2,
            self.method,
            self.rtol,
            self.max_refine,
        )


def cbar1(T0_max):
    """Decay rate :math:`\\bar c_1 = 1/(4\\sup T_0)` used in the kernel bounds."""
    return 1.0 / (4.0 * T0_max)


def _pair(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape[-1:] != (3,) or q.shape[-1:] != (3,):
        raise UsageError("momenta must have trailing dimension 3")
    return np.broadcast_arrays(p, q)


def _barred_invariants(ctx, p, q):
    """Rest-frame momenta, ``g``, ``s`` and the pieces of the exponent."""
    st = ctx.state
    c = st.c
    pb, pb0 = boost_to_rest(st.u, p, c)
    qb, qb0 = boost_to_rest(st.u, q, c)
    d = pb - qb
    d2 = np.einsum("...i,...i->...", d, d)
    # g is invariant; evaluate it from barred momenta
    dE = np.einsum("...i,...i->...", d, pb + qb) / (pb0 + qb0)
    g2 = np.maximum(d2 - dE * dE, 0.0)
    g = np.sqrt(g2)
    s = g2 + 4.0 * c * c
    return pb, pb0, qb, qb0, np.sqrt(d2), dE, g, s


def kernel_kc1(ctx, p, q):
    r"""Loss kernel :math:`k_{c1}(p,q) = \pi c g\sqrt s\sqrt{M_c(p)M_c(q)}/(p^0q^0)`.

    Vectorized over broadcast batches of ``p`` and ``q``.
    """
    p, q = _pair(p, q)
    st = ctx.state
    c = st.c
    _, _, _, _, _, _, g, s = _barred_invariants(ctx, p, q)
    logm = 0.5 * (log_juttner(st, p) + log_juttner(st, q))
    return np.pi * c * g * np.sqrt(s) / (energy(p, c) * energy(q, c)) * np.exp(logm)


def _gain_kernel(ctx, p, q, lam=0.0):
    p, q = _pair(p, q)
    st = ctx.state
    c, T = st.c, st.T0
    pb, pb0, qb, qb0, d, dE, g, s = _barred_invariants(ctx, p, q)
    if np.any(g <= 0.0):
        raise DomainError("gain kernel is singular at p = q")
    rs = np.sqrt(s)
    a = 1.0 - lam
    ell = c * (pb0 + qb0) / (2.0 * T)
    cross = np.cross(pb, qb)
    jj = c * np.sqrt(np.einsum("...i,...i->...", cross, cross)) / (g * T)
    D = c * rs * d / (2.0 * g * T)
    expo = -(0.25 * d * d + (c * dE / g) ** 2) / (T * (1.0 + rs * d / (2.0 * c * g)))
    Dt = a * D
    lt = a * ell
    bracket = lt / (Dt * Dt) * (1.0 + 1.0 / Dt) + 1.0 / Dt
    pref = c * np.pi * s * rs / (4.0 * g * energy(p, c) * energy(q, c))
    value = pref * bracket * np.exp(a * (ctx.log_c0_scaled + expo))
    return KernelEval(value, ell, jj, pb, qb, D)


def kernel_kc2(ctx, p, q):
    """Gain kernel :math:`k_{c2}` in closed form; returns a :class:`KernelEval`.

    Raises
    ------
    DomainError
        If any pair has ``p == q``.
    """
    return _gain_kernel(ctx, p, q, 0.0)


def xi_kernel(ctx, p, q, lam):
    r"""Weighted kernel :math:`\xi` with :math:`\tilde\ell = (1-\lambda)\bar\ell`,
    :math:`\tilde j = (1-\lambda)\bar j` and normalization :math:`c_0^{1-\lambda}`.

    ``lam = 0`` reproduces :func:`kernel_kc2`.
    """
    if not 0.0 <= lam < 1.0:
        raise UsageError("lambda must lie in [0, 1)")
    return _gain_kernel(ctx, p, q, lam).value


def kernel_kc2_oracle(ctx, p, q, lam=0.0, rtol=1e-10):
    r"""Reference :math:`k_{c2}` from the 1-D integral

    .. math::
        \int_0^\infty \frac{y(1+\sqrt{y^2+1})}{\sqrt{y^2+1}}e^{-\bar\ell\sqrt{y^2+1}}I_0(\bar jy)\,dy,

    evaluated by adaptive quadrature on a scaled integrand
    :math:`e^{\gamma-\bar\ell\sqrt{1+y^2}+\bar jy}\,\mathrm{i0e}(\bar jy)`.  Single pair.

    Raises
    ------
    ConvergenceError
        If the adaptive quadrature does not reach ``rtol``.
    """
    p = np.asarray(p, dtype=float).reshape(3)
    q = np.asarray(q, dtype=float).reshape(3)
    st = ctx.state
    c, T = st.c, st.T0
    a = 1.0 - lam
    pb, pb0, qb, qb0, d, dE, g, s = _barred_invariants(ctx, p, q)
    if g <= 0:
        raise DomainError("gain kernel is singular at p = q")
    pb2 = float(pb @ pb)
    qb2 = float(qb @ qb)
    # gamma - ell = -c (pbar0 - c + qbar0 - c) / (2 T)
    g_minus_ell = -c * (pb2 / (pb0 + c) + qb2 / (qb0 + c)) / (2.0 * T)
    ell = c * (pb0 + qb0) / (2.0 * T)
    jj = c * float(np.linalg.norm(np.cross(pb, qb))) / (g * T)
    lt, jt = a * ell, a * jj
    Dt = math.sqrt(max((lt - jt) * (lt + jt), 0.0))
    ystar = jt / Dt
    width = (1.0 + ystar**2) ** 0.75 / math.sqrt(lt)

    def f(y):
        r = math.sqrt(1.0 + y * y)
        expo = a * g_minus_ell - lt * (y * y / (r + 1.0)) + jt * y
        return y * (1.0 + r) / r * math.exp(expo) * specfun.bessel_i0e(jt * y)

    lo = max(ystar - 60.0 * width, 0.0)
    hi = ystar + 60.0 * width
    pts = [ystar] if lo < ystar < hi else None
    val, err = integrate.quad(f, lo, hi, points=pts, epsabs=0.0, epsrel=rtol, limit=400)
    if not np.isfinite(val) or err > 100 * rtol * abs(val):
        raise ConvergenceError("y-integral did not converge", {"value": val, "error": err})
    pref = c * math.pi * s**1.5 / (4.0 * g * energy(p, c) * energy(q, c))
    return float(pref * val * math.exp(a * ctx.log_c0_scaled))


def newtonian_k1(state, p, q):
    r""":math:`k_1(p,q) = 2\pi|p-q|\rho(2\pi\theta)^{-3/2}e^{-|p-\mathfrak u|^2/(4\theta)-|q-\mathfrak u|^2/(4\theta)}`."""
    p, q = _pair(p, q)
    th = state.theta
    dp = p - state.u
    dq = q - state.u
    e = (np.einsum("...i,...i->...", dp, dp) + np.einsum("...i,...i->...", dq, dq)) / (4.0 * th)
    r = np.sqrt(np.einsum("...i,...i->...", p - q, p - q))
    return 2.0 * np.pi * r * state.rho * (2.0 * np.pi * th) ** -1.5 * np.exp(-e)


def newtonian_k2(state, p, q):
    r""":math:`k_2(p,q) = \frac{2\rho}{|p-q|\sqrt{2\pi\theta}}e^{-|p-q|^2/(8\theta) - (|p-\mathfrak u|^2-|q-\mathfrak u|^2)^2/(8\theta|p-q|^2)}`."""
    p, q = _pair(p, q)
    th = state.theta
    d = p - q
    r2 = np.einsum("...i,...i->...", d, d)
    if np.any(r2 <= 0):
        raise DomainError("k2 is singular at p = q")
    dp = p - state.u
    dq = q - state.u
    diff = np.einsum("...i,...i->...", dp, dp) - np.einsum("...i,...i->...", dq, dq)
    e = r2 / (8.0 * th) + diff * diff / (8.0 * th * r2)
    return 2.0 * state.rho / (np.sqrt(r2) * np.sqrt(2.0 * np.pi * th)) * np.exp(-e)


def _shell_nodes(center, radius, n_r, n_theta, n_phi):
    """Spherical shells about ``center`` out to ``radius``; radial panels at fixed breaks."""
    edges = [0.0] + [b for b in _SHELL_BREAKS if b < radius] + [radius]
    rs, wr = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        r, w = gauss_legendre(n_r, a, b)
        rs.append(r)
        wr.append(w * r * r)
    r = np.concatenate(rs)
    wr = np.concatenate(wr)
    dirs, wa = shell_directions(n_theta, n_phi)
    nodes = np.asarray(center, dtype=float) + (r[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
    weights = (wr[:, None] * wa[None, :]).ravel()
    return nodes, weights


def shell_integral(func, center, radius, spec=None):
    r"""Adaptive integral of ``func(q)`` over the ball :math:`|q-\mathrm{center}|\le R`.

    The rule is a product of Gauss-Legendre radial panels broken at
    :math:`|q-p|\in\{10^{-3},10^{-1},1,3,10,\dots\}` and a spherical angular
    rule, so integrable :math:`1/|p-q|` singularities are absorbed by the
    :math:`r^2` Jacobian.  The resolution is raised by a factor 3/2 until two
    successive values agree to ``spec.rtol``.

    Returns
    -------
    value : float
    error : float
        Difference between the last two refinements.

    Raises
    ------
    ConvergenceError
        When ``spec.max_refine`` refinements do not reach the tolerance.
    """
    spec = spec or QuadratureSpec()
    prev = None
    err = float("nan")
    cur = spec
    for level in range(spec.max_refine + 1):
        nodes, w = _shell_nodes(center, radius, cur.n_r, cur.n_theta, cur.n_phi)
        val = float(func(nodes) @ w)
        if prev is not None:
            err = abs(val - prev)
            if err <= spec.rtol * abs(val) or err == 0.0:
                return val, err
        prev = val
        cur = cur.refined()
    raise ConvergenceError(
        "singular-shell quadrature did not converge",
        {"value": val, "change": err, "levels": spec.max_refine},
    )


def _support_radius(state):
    return juttner_radius(state.c, state.T0, decades=18.0)


def collision_frequency(ctx, p, quad=None):
    r"""Collision frequency :math:`\nu_c(p) = 4\pi\int v_\phi(p,q)M_c(q)\,dq`.

    The solid-angle integral is trivial because :math:`v_\phi` does not depend
    on :math:`\omega`.  When :math:`\bar p` lies inside the equilibrium's
    support the integral uses shells centred at ``p`` (so the cone singularity
    of :math:`g` at :math:`q=p` is radial); otherwise a rule centred on the
    equilibrium is used.

    Parameters
    ----------
    ctx : KernelContext
    p : array_like, shape (3,)
    quad : QuadratureSpec, optional
    """
    quad = quad or QuadratureSpec()
    st = ctx.state
    c = st.c
    p = np.asarray(p, dtype=float).reshape(3)
    pbar, _ = boost_to_rest(st.u, p, c)
    R = _support_radius(st)
    method = quad.method
    if method == "auto":
        method = "shell" if np.linalg.norm(pbar) < R else "rest"

    def integrand(q):
        _, _, _, _, _, _, g, s = _barred_invariants(ctx, p, q)
        v = 0.25 * c * g * np.sqrt(s) / (energy(p, c) * energy(q, c))
        return 4.0 * np.pi * v * np.exp(log_juttner(st, q))

    if method == "shell":
        # ball around p covering the equilibrium support in lab coordinates
        lab_radius = float(np.linalg.norm(p - st.u)) + R * st.u0 / c + 1.0
        val, _ = shell_integral(integrand, p, lab_radius, quad)
        return val
    if method != "rest":
        raise UsageError(f"unknown quadrature method {quad.method!r}")
    prev = None
    cur = quad
    for level in range(quad.max_refine + 1):
        grid = rest_frame_grid(st.u, c, st.T0, cur.n_r * 2, cur.n_theta, cur.n_phi)
        val = float(grid.integrate(integrand(grid.nodes)))
        if prev is not None and abs(val - prev) <= quad.rtol * abs(val):
            return val
        prev = val
        cur = cur.refined()
    raise ConvergenceError("collision frequency quadrature did not converge", {"value": val})


def _weight_ratio(p, q, ell, varpi):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    p2 = float(p @ p)
    q2 = np.einsum("...i,...i->...", q, q)
    return ((1.0 + p2) / (1.0 + q2)) ** (0.5 * ell) * np.exp(varpi * (math.sqrt(p2) - np.sqrt(q2)))


def _kernel_radius(ctx, p):
    st = ctx.state
    return float(np.linalg.norm(np.asarray(p) - st.u)) + _support_radius(st) * st.u0 / st.c + 30.0 * math.sqrt(st.T0)


def weighted_kernel_integral(ctx, which, p, ell=0.0, varpi=0.0, spec=None):
    r"""Weighted integral
    :math:`\int k(p,q)\frac{w_\ell(p)e^{\varpi|p|}}{w_\ell(q)e^{\varpi|q|}}\,dq`
    for ``which`` in ``{"kc1", "kc2"}``, by adaptive singular-shell quadrature.

    The ``q = p`` node is never evaluated because all shell radii are positive.
    """
    p = np.asarray(p, dtype=float).reshape(3)
    if which == "kc1":
        kern = lambda q: kernel_kc1(ctx, p, q)
    elif which == "kc2":
        kern = lambda q: kernel_kc2(ctx, p, q).value
    else:
        raise UsageError("which must be 'kc1' or 'kc2'")
    if varpi < 0 or ell < 0:
        raise UsageError("ell and varpi must be nonnegative")
    val, _ = shell_integral(lambda q: kern(q) * _weight_ratio(p, q, ell, varpi), p, _kernel_radius(ctx, p), spec)
    return val


def kernel_l1_difference(ctx, cls, which, p, spec=None, self_check=False):
    r""":math:`\int|k_{ci}(p,q) - k_i(p,q)|\,dq` for ``which`` in ``{"k1", "k2"}``.

    ``cls`` is the Newtonian state paired with ``ctx.state``.  With
    ``self_check=True`` the Newtonian kernel is compared with itself, which
    must give zero.
    """
    p = np.asarray(p, dtype=float).reshape(3)
    if which == "k1":
        rel = lambda q: kernel_kc1(ctx, p, q)
        cls_k = lambda q: newtonian_k1(cls, p, q)
    elif which == "k2":
        rel = lambda q: kernel_kc2(ctx, p, q).value
        cls_k = lambda q: newtonian_k2(cls, p, q)
    else:
        raise UsageError("which must be 'k1' or 'k2'")
    if self_check:
        rel = cls_k
    val, _ = shell_integral(lambda q: np.abs(rel(q) - cls_k(q)), p, _kernel_radius(ctx, p), spec)
    return val
