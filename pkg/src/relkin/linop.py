r"""Discrete linearized collision operator on a momentum grid.

On nodes :math:`p_k` with weights :math:`w_k` the operator
:math:`L_c = \nu_c - K_c` is discretized by Nystrom quadrature with
singularity subtraction,

.. math::
    (K_cf)(p_k) \approx \sum_{l\ne k} k_c(p_k,p_l)w_l\,(f_l - f_k) + f_k\,\kappa_k,
    \qquad \kappa_k = \int_B k_c(p_k,q)\,dq,

where :math:`B` is the ball covered by the grid and :math:`\kappa_k` is
computed by a ray quadrature centred at :math:`p_k` that absorbs the
:math:`1/|p-q|` singularity.  The matrix is stored in the symmetric form
:math:`S = W^{1/2}LW^{-1/2}`, so :math:`\langle Lf, g\rangle_{L^2}` is
:math:`y^tSz` with :math:`y = W^{1/2}f`, :math:`z = W^{1/2}g`.

The kernel of :math:`K_c` is :math:`k_c = 2k_{c2} - k_{c1}` with the
closed-form :math:`k_{c2}` of :mod:`relkin.collision`: the two gain terms of
:math:`K_{c2}` are equal after exchanging the post-collisional momenta, and
each is given by the closed form.  This normalization is the one for which
:math:`L_c\sqrt{M_c} = 0`.

Solves and the coercivity problem are posed on the discrete complement of
the null-space family :math:`\chi^c_\alpha`.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import linalg

from .collision import KernelContext, QuadratureSpec, collision_frequency, kernel_kc1, kernel_kc2
from .equilibria import juttner_log_derivative, log_juttner
from .errors import ConvergenceError, UsageError
from .kinematics import energy
from .nullspace import build_rel_basis, eval_rel_family
from .quadrature import MomentumGrid, gauss_legendre, spherical_grid

__all__ = [
    "DiscreteOperator",
    "SolveResult",
    "CoercivityResult",
    "collision_grid",
    "ball_kernel_integral",
    "assemble_Lc",
    "null_residuals",
    "coercivity_constant",
    "spectral_floor",
    "solve_Linv",
    "psi1_source",
    "psi1_solve",
    "decay_certificate",
    "weighted_coercivity_defect",
]

_RAY_BREAKS = (1e-3, 0.1, 1.0, 3.0, 10.0, 30.0)


def collision_grid(state, n_r=16, n_theta=10, n_phi=16, extent=8.0, panels=None):
    r"""Spherical grid for the operator, centred on the fluid velocity.

    The radius is :math:`\min(\mathrm{extent}\sqrt{T_0}\,u^0/c,\ 1.5c)`.
    """
    R = min(extent * math.sqrt(state.T0) * state.u0 / state.c, 1.5 * state.c)
    g = spherical_grid(n_r, n_theta, n_phi, R, panels)
    if np.any(state.u):
        g = MomentumGrid(g.nodes + state.u, g.weights, g.shape, g.radii, g.radius)
    return g


def _grid_center(grid):
    if grid.radii is None or not grid.shape:
        raise UsageError("operator grids must be tensor spherical grids")
    n_ang = grid.shape[1] * grid.shape[2]
    # the radial shells are concentric; the mean of the innermost shell is the centre
    return grid.nodes[:n_ang].mean(axis=0)


def _kernel(ctx, p, q):
    # both gain terms of K_c2 contribute one closed-form k_c2 each
    return 2.0 * kernel_kc2(ctx, p, q).value - kernel_kc1(ctx, p, q)


def _pole_rotation(axis):
    """Rotation taking the z axis to the unit vector ``axis``."""
    z = np.array([0.0, 0.0, 1.0])
    v = np.cross(z, axis)
    s = float(np.linalg.norm(v))
    cth = float(axis @ z)
    if s < 1e-14:
        return np.eye(3) if cth > 0 else np.diag([1.0, -1.0, -1.0])
    vx = np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])
    return np.eye(3) + vx + vx @ vx * ((1.0 - cth) / s**2)


def _graded_directions(n_theta, n_phi, gap):
    r"""Directions with Gauss panels in :math:`t = 1-\cos\theta` graded geometrically from ``gap``.

    Rays close to the pole exit the ball after a short distance when the
    source point is near the sphere; grading resolves that boundary layer.
    """
    edges = [0.0]
    t = gap
    while t < 2.0:
        edges.append(t)
        t *= 4.0
    edges.append(2.0)
    ts, wt = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        x, w = gauss_legendre(max(4, n_theta // 2), a, b)
        ts.append(x)
        wt.append(w)
    ct = 1.0 - np.concatenate(ts)
    wt = np.concatenate(wt)
    ph = 2.0 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    st = np.sqrt(np.maximum(1.0 - ct * ct, 0.0))
    dirs = np.stack(
        [
            (st[:, None] * np.cos(ph)[None, :]).ravel(),
            (st[:, None] * np.sin(ph)[None, :]).ravel(),
            np.repeat(ct, n_phi),
        ],
        axis=1,
    )
    return dirs, np.repeat(wt, n_phi) * (2.0 * np.pi / n_phi)


def ball_kernel_integral(ctx, p, center, radius, spec=None):
    r""":math:`\int_{|q-o|\le R}k_c(p,q)\,dq` for ``p`` inside the ball.

    Rays :math:`q = p + r\omega` run to the sphere at
    :math:`r_{\max}(\omega)`; each ray carries Gauss-Legendre panels broken at
    fixed radii, so the :math:`r^2` Jacobian absorbs the singularity at
    :math:`r = 0`.  Resolution grows by 3/2 until two levels agree to
    ``spec.rtol`` relative to :math:`\int_B|k_c(p,q)|\,dq`.

    Raises
    ------
    ConvergenceError
    """
    spec = spec or QuadratureSpec(n_r=12, n_theta=24, n_phi=48, rtol=1e-6, max_refine=4)
    p = np.asarray(p, dtype=float).reshape(3)
    d = p - np.asarray(center, dtype=float)
    dd = float(d @ d)
    if dd >= radius * radius:
        raise UsageError("p must lie inside the ball")
    dist = math.sqrt(dd)
    rot = _pole_rotation(d / dist) if dist > 0 else np.eye(3)
    gap = max((radius - dist) / radius, 1e-12)
    prev = None
    err = float("nan")
    cur = spec
    for level in range(spec.max_refine + 1):
        dirs, wa = _graded_directions(cur.n_theta, cur.n_phi, gap)
        dirs = dirs @ rot.T
        b = dirs @ d
        rmax = -b + np.sqrt(b * b + radius * radius - dd)
        x, wx = gauss_legendre(cur.n_r, 0.0, 1.0)
        edges = [np.zeros_like(rmax)] + [np.minimum(e, rmax) for e in _RAY_BREAKS] + [rmax]
        total = 0.0
        mass = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            span = hi - lo
            keep = span > 0
            if not np.any(keep):
                continue
            r = lo[keep, None] + span[keep, None] * x[None, :]
            w = wa[keep, None] * span[keep, None] * wx[None, :] * r * r
            q = p + r[..., None] * dirs[keep, None, :]
            kw = _kernel(ctx, p, q) * w
            total += float(np.sum(kw))
            mass += float(np.sum(np.abs(kw)))
        if prev is not None:
            err = abs(total - prev)
            if err <= spec.rtol * mass:
                return total
        prev = total
        cur = cur.refined()
    raise ConvergenceError("ray quadrature did not converge", {"value": total, "change": err})


@dataclass(frozen=True)
class DiscreteOperator:
    r"""Symmetric discretization of :math:`L_c`.

    Attributes
    ----------
    S : ndarray, shape (N, N)
        :math:`W^{1/2}LW^{-1/2}`, symmetric.
    nu : ndarray, shape (N,)
        Collision frequency at the nodes.
    kappa : ndarray, shape (N,)
        Ball integrals of :math:`k_c(p_k,\cdot)`.
    """

    ctx: KernelContext
    grid: MomentumGrid
    S: np.ndarray = field(repr=False)
    nu: np.ndarray = field(repr=False)
    kappa: np.ndarray = field(repr=False)
    asymmetry: float = 0.0

    @property
    def state(self):
        return self.ctx.state

    @property
    def sqrt_w(self):
        return np.sqrt(self.grid.weights)

    @property
    def L(self):
        """Matrix acting on nodal values: :math:`L = \\mathrm{diag}(\\nu) - K`."""
        sw = self.sqrt_w
        return self.S / sw[:, None] * sw[None, :]

    @property
    def N(self):
        return self.nu.size

    def apply(self, f):
        """Nodal values of :math:`L_cf`."""
        sw = self.sqrt_w
        return (self.S @ (sw * np.asarray(f, dtype=float))) / sw

    def inner(self, f, g):
        """Quadrature :math:`L^2` inner product."""
        return float(np.sum(self.grid.weights * f * g))

    def null_family(self):
        """Nodal values of the five :math:`\\chi^c_\\alpha`, shape ``(5, N)``."""
        return eval_rel_family(build_rel_basis(self.state), self.state, self.grid.nodes)


def _radial_symmetry(state, grid, center):
    return not np.any(state.u) and np.allclose(center, 0.0, atol=1e-12 * max(grid.radius, 1.0))


def assemble_Lc(ctx, grid, quad=None, ray_spec=None, block=64):
    r"""Assemble :math:`L_c` on ``grid`` by singularity-subtracted Nystrom quadrature.

    At rest (:math:`u = 0`) with a grid centred at the origin,
    :math:`\nu_c` and :math:`\kappa` depend only on :math:`|p|` and are
    computed once per radius.

    Parameters
    ----------
    ctx : KernelContext
    grid : MomentumGrid
        Tensor spherical grid, e.g. from :func:`collision_grid`.
    quad : QuadratureSpec, optional
        Rule for :math:`\nu_c`.
    ray_spec : QuadratureSpec, optional
        Rule for :math:`\kappa`.
    block : int
        Rows per vectorized kernel evaluation.
    """
    st = ctx.state
    P = grid.nodes
    N = P.shape[0]
    center = _grid_center(grid)
    R = grid.radius

    nu = np.empty(N)
    kappa = np.empty(N)
    if _radial_symmetry(st, grid, center):
        # k_c(p, .) is axisymmetric about p, so the azimuthal rule can be minimal
        ray_axi = ray_spec or QuadratureSpec(n_r=12, n_theta=48, n_phi=2, rtol=1e-6, max_refine=6)
        n_ang = grid.shape[1] * grid.shape[2]
        for i, r in enumerate(grid.radii):
            p = np.array([0.0, 0.0, r])
            nu[i * n_ang:(i + 1) * n_ang] = collision_frequency(ctx, p, quad)
            kappa[i * n_ang:(i + 1) * n_ang] = ball_kernel_integral(ctx, p, center, R, ray_axi)
    else:
        for k in range(N):
            nu[k] = collision_frequency(ctx, P[k], quad)
            kappa[k] = ball_kernel_integral(ctx, P[k], center, R, ray_spec)

    w = grid.weights
    sw = np.sqrt(w)
    S = np.empty((N, N))
    far = P[0] + 10.0 * R + 1.0  # placeholder partner for the excluded diagonal
    for s0 in range(0, N, block):
        rows = np.arange(s0, min(s0 + block, N))
        q = np.broadcast_to(P, (rows.size, N, 3)).copy()
        q[np.arange(rows.size), rows] = far
        kv = _kernel(ctx, P[rows, None, :], q)
        kv[np.arange(rows.size), rows] = 0.0
        Kdiag = kappa[rows] - kv @ w
        S[rows] = -(sw[rows, None] * kv * sw[None, :])
        S[rows, rows] = nu[rows] - Kdiag
    asym = float(np.max(np.abs(S - S.T)) / np.max(np.abs(S)))
    S = 0.5 * (S + S.T)
    return DiscreteOperator(ctx, grid, S, nu, kappa, asym)


def null_residuals(op):
    r"""Relative residuals :math:`\|L\chi^c_\alpha\|/(\|\nu\chi^c_\alpha\|)` for the five family members."""
    chi = op.null_family()
    out = np.empty(5)
    for a in range(5):
        Lc = op.apply(chi[a])
        out[a] = math.sqrt(op.inner(Lc, Lc) / op.inner(op.nu * chi[a], op.nu * chi[a]))
    return out


def _null_basis(op):
    """Orthonormal columns spanning :math:`W^{1/2}\\chi^c_\\alpha`."""
    U = (op.null_family() * op.sqrt_w).T
    Q, _ = np.linalg.qr(U)
    return Q


@dataclass(frozen=True)
class CoercivityResult:
    """Smallest Rayleigh quotient on the complement and the leading spectrum of the pencil."""

    value: float
    spectrum: np.ndarray
    N: int


def coercivity_constant(op, basis=None, n_eigs=6):
    r"""Discrete coercivity constant

    .. math::
        \hat\zeta = \min_{g\perp\mathcal N_c}\frac{\langle L_cg, g\rangle}{\|g\|^2_{\nu_c}},

    from the symmetric pencil :math:`(S, \mathrm{diag}\,\nu)` after explicit
    deflation of the discrete null-space family.  ``basis`` is accepted for
    interface symmetry; the family of ``op.state`` is used.

    Returns
    -------
    CoercivityResult
    """
    if basis is not None and not hasattr(basis, "zeta"):
        raise UsageError("basis must be a BasisCoeffs instance")
    U = _null_basis(op)
    isn = 1.0 / np.sqrt(op.nu)
    A = op.S * isn[:, None] * isn[None, :]
    # h = V^{1/2} y with y perp U  <=>  (V^{-1/2} U)^t h = 0
    Ut, _ = np.linalg.qr(U * isn[:, None])
    AU = A @ Ut
    PA = A - Ut @ AU.T
    PAP = PA - (PA @ Ut) @ Ut.T
    shift = 10.0 * float(np.abs(np.diag(A)).max())
    PAP += shift * (Ut @ Ut.T)
    PAP = 0.5 * (PAP + PAP.T)
    vals = linalg.eigh(PAP, eigvals_only=True, subset_by_index=[0, n_eigs - 1], driver="evr")
    return CoercivityResult(float(vals[0]), vals, op.N)


def spectral_floor(op, n_eigs=10):
    """Lowest eigenvalues of the undeflated pencil :math:`(S, \\mathrm{diag}\\,\\nu)`."""
    isn = 1.0 / np.sqrt(op.nu)
    A = op.S * isn[:, None] * isn[None, :]
    return linalg.eigh(0.5 * (A + A.T), eigvals_only=True, subset_by_index=[0, n_eigs - 1], driver="evr")


@dataclass(frozen=True)
class SolveResult:
    r"""Solution of :math:`L_cf = g` on :math:`\mathcal N_c^\perp`.

    ``residual`` is the relative residual of the deflated system;
    ``consistency`` the relative residual against the raw discrete operator;
    ``certificate`` is :math:`\max_k|f_k|M_c^{-\lambda/2}(p_k)`.
    """

    f: np.ndarray
    residual: float
    consistency: float
    rhs_null_fraction: float
    certificate: float
    lam: float


def _log_m(op):
    return log_juttner(op.state, op.grid.nodes)


def solve_Linv(op, rhs, lam=0.9, project=True, tol=1e-8):
    r"""Solve :math:`L_cf = g` with :math:`f\perp\mathcal N_c`.

    The operator is deflated, :math:`\hat S = \Pi S\Pi` with :math:`\Pi` the
    orthogonal projector off the discrete family, and conjugated by
    :math:`D = \mathrm{diag}(M_c^{-\lambda/2})` so that the unknown
    :math:`z = M_c^{-\lambda/2}W^{1/2}f` is of moderate size everywhere.  The
    bordered system

    .. math::
        \begin{pmatrix} D\hat SD^{-1} & DU\\ (D^{-1}U)^t & 0\end{pmatrix}
        \begin{pmatrix} z\\ \mu\end{pmatrix} =
        \begin{pmatrix} D\Pi W^{1/2}g\\ 0\end{pmatrix}

    is row and column equilibrated and solved densely.

    Parameters
    ----------
    op : DiscreteOperator
    rhs : ndarray, shape (N,)
        Nodal values of :math:`g`.
    lam : float
        Decay exponent of the conjugation and of the certificate.
    project : bool
        Remove the null-space component of ``rhs`` first.  When ``False`` a
        nonzero component raises.
    tol : float
        Required relative residual.

    Raises
    ------
    UsageError
        Unprojected right-hand side with ``project=False``.
    ConvergenceError
        Residual above ``tol``.
    """
    g = np.asarray(rhs, dtype=float)
    sw = op.sqrt_w
    U = _null_basis(op)
    y_g = sw * g
    norm_g = float(np.linalg.norm(y_g))
    if norm_g == 0.0:
        return SolveResult(np.zeros_like(g), 0.0, 0.0, 0.0, 0.0, lam)
    coef = U.T @ y_g
    null_frac = float(np.linalg.norm(coef) / norm_g)
    if not project and null_frac > 1e-8:
        raise UsageError(f"rhs has a null-space component of relative size {null_frac:.2e}")
    b = y_g - U @ coef

    S = op.S
    SU = S @ U
    Shat = S - U @ SU.T - SU @ U.T + U @ (U.T @ SU) @ U.T
    logd = -0.5 * lam * _log_m(op)
    logd -= logd.min()
    d = np.exp(logd)
    A = Shat * d[:, None] / d[None, :]
    N = op.N
    big = np.zeros((N + 5, N + 5))
    big[:N, :N] = A
    big[:N, N:] = U * d[:, None]
    big[N:, :N] = (U / d[:, None]).T
    r = np.zeros(N + 5)
    r[:N] = d * b
    rs = 1.0 / np.maximum(np.abs(big).max(axis=1), 1e-300)
    cs = 1.0 / np.maximum(np.abs(big * rs[:, None]).max(axis=0), 1e-300)
    sol = linalg.solve(big * rs[:, None] * cs[None, :], r * rs)
    sol *= cs
    z = sol[:N]
    y = z / d
    res = float(np.linalg.norm(Shat @ y - b) / norm_g)
    if res > tol:
        raise ConvergenceError("deflated solve missed its tolerance", {"residual": res, "tol": tol})
    f = y / sw
    raw = float(np.linalg.norm(S @ y - y_g) / norm_g)
    cert = decay_certificate(op, f, lam)
    return SolveResult(f, res, raw, null_frac, cert, lam)


def decay_certificate(op, f, lam=0.9):
    r""":math:`\max_k|f(p_k)|\,M_c^{-\lambda/2}(p_k)`, formed in logarithms."""
    f = np.asarray(f, dtype=float)
    with np.errstate(divide="ignore"):
        lv = np.log(np.abs(f)) - 0.5 * lam * _log_m(op)
    return float(np.exp(lv.max())) if np.any(f) else 0.0


def psi1_source(state, p, d_dt, d_dx, direction=0):
    r"""Source :math:`g_1 = -M_c^{-1/2}(\partial_tM_c + \hat p\cdot\nabla_xM_c)` at momenta ``p``.

    :math:`\hat p = cp/p^0` and the spatial derivative acts along
    ``direction``.  Each of ``d_dt``, ``d_dx`` is ``(dn0, du, dT0)``.
    """
    p = np.asarray(p, dtype=float)
    c = state.c
    lt = juttner_log_derivative(state, p, *d_dt)
    lx = juttner_log_derivative(state, p, *d_dx)
    vel = c * p[..., direction] / energy(p, c)
    return -np.exp(0.5 * log_juttner(state, p)) * (lt + vel * lx)


def psi1_solve(op, d_dt, d_dx, direction=0, lam=0.9):
    r""":math:`\psi_1 = L_c^{-1}g_1` on the operator grid; see :func:`psi1_source`.

    Returns
    -------
    SolveResult
    """
    g = psi1_source(op.state, op.grid.nodes, d_dt, d_dx, direction)
    return solve_Linv(op, g, lam=lam)


def weighted_coercivity_defect(op, f, lam=0.5):
    r"""Smallest :math:`C` with
    :math:`\langle M^{-\lambda/2}L_cf, M^{-\lambda/2}f\rangle \ge \tfrac12\|M^{-\lambda/2}f\|^2_\nu - C\|f\|^2_\nu`.

    ``f`` may be a batch of shape ``(m, N)``; returns shape ``(m,)``.
    """
    F = np.atleast_2d(np.asarray(f, dtype=float))
    wt = np.exp(-0.5 * lam * _log_m(op))
    w = op.grid.weights
    nu = op.nu
    LF = np.array([op.apply(x) for x in F])
    lhs = np.sum(w * wt**2 * LF * F, axis=1)
    half = 0.5 * np.sum(w * nu * (wt * F) ** 2, axis=1)
    base = np.sum(w * nu * F * F, axis=1)
    return (half - lhs) / base
