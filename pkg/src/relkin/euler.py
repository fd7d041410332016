r"""One-dimensional periodic solvers for the relativistic and classical Euler systems.

Both systems are advanced in primitive symmetric form,

.. math::
    B_0(V)\partial_tV + B_1(V)\partial_xV = 0,\qquad V = (P_0, u, S),

.. math::
    D_0(W)\partial_tW + D_1(W)\partial_xW = 0,\qquad W = (\mathcal P, \mathfrak u, \eta),

with fourth-order central differences on a uniform periodic grid and the
classical RK4 integrator.  The relativistic coefficients are evaluated from
:math:`(P_0, S)` through the exact Juttner closure at every stage.
"""

from dataclasses import dataclass, field
import csv
import json
import math

import numpy as np

from . import specfun
from .equilibria import cls_entropy, solve_gamma_PS, state_from_PS, thermo_derivatives
from .errors import BlowUpError, ConvergenceError, UsageError

__all__ = [
    "GridField",
    "LimitReport",
    "initial_field",
    "rel_coefficients",
    "cls_coefficients",
    "time_derivative",
    "max_wave_speed",
    "step_rel_euler",
    "step_cls_euler",
    "evolve",
    "newtonian_limit_experiment",
    "fluid_derivatives",
    "write_timeseries_csv",
]


@dataclass(frozen=True)
class GridField:
    """Periodic 1-D field of 5-vectors ``V`` (shape ``(5, M)``) on ``[0, length)``.

    ``c = None`` marks a classical field :math:`(\\mathcal P, \\mathfrak u, \\eta)`;
    otherwise the components are :math:`(P_0, u, S)`.
    """

    V: np.ndarray
    t: float = 0.0
    c: float = None
    length: float = 1.0

    def __post_init__(self):
        V = np.asarray(self.V, dtype=float)
        if V.ndim != 2 or V.shape[0] != 5 or V.shape[1] < 5:
            raise UsageError("field values must have shape (5, M) with M >= 5")
        object.__setattr__(self, "V", V)
        _check_admissible(V, self.c, self.t)

    @property
    def M(self):
        return self.V.shape[1]

    @property
    def dx(self):
        return self.length / self.M

    @property
    def x(self):
        return self.dx * np.arange(self.M)

    @property
    def relativistic(self):
        return self.c is not None

    def replace(self, V, t):
        return GridField(V, t, self.c, self.length)


@dataclass
class LimitReport:
    """Newtonian-limit sweep: sup-in-time gaps per ``c`` and the log-log fit."""

    c: np.ndarray
    gaps: np.ndarray
    component_gaps: np.ndarray
    slope: float
    r_squared: float
    times: np.ndarray = field(default=None, repr=False)
    series: np.ndarray = field(default=None, repr=False)

    def to_dict(self):
        return {
            "c": self.c.tolist(),
            "gaps": self.gaps.tolist(),
            "component_gaps": self.component_gaps.tolist(),
            "slope": self.slope,
            "r_squared": self.r_squared,
        }

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def _check_admissible(V, c, t):
    if not np.all(np.isfinite(V)):
        raise BlowUpError("non-finite state", {"t": t})
    if np.any(V[0] <= 0):
        raise BlowUpError("pressure lost positivity", {"t": t, "min_pressure": float(V[0].min())})


def initial_field(M=256, P_bar=1.0, S_bar=None, amplitude=0.05, c=None, length=1.0):
    r"""Smooth data :math:`P = \bar P(1 + \epsilon\sin 2\pi x)`, :math:`u = 0`, :math:`S = \bar S`.

    ``S_bar`` defaults to the classical entropy of :math:`\rho = \theta = 1`.
    """
    if S_bar is None:
        S_bar = float(cls_entropy(1.0, 1.0))
    x = length * np.arange(M) / M
    V = np.zeros((5, M))
    V[0] = P_bar * (1.0 + amplitude * np.sin(2.0 * np.pi * x / length))
    V[4] = S_bar
    return GridField(V, 0.0, c, length)


def rel_coefficients(V, c):
    r"""Batched :math:`B_0` and :math:`B_1` (shape ``(M, 5, 5)``) for relativistic values ``V``."""
    P, u, S = V[0], V[1:4].T, V[4]
    g = solve_gamma_PS(P, S, c)
    T = c * c / g
    n = P / T
    phi = specfun.ratio_k32(g)
    enth = n * c * c * phi
    ndp = n * phi * T * specfun.sound_ratio(g)
    u0 = np.sqrt(c * c + np.einsum("ki,ki->k", u, u))
    uu = np.einsum("ki,kj->kij", u, u) / (u0**2)[:, None, None]
    eye = np.eye(3)
    M = P.size
    B0 = np.zeros((M, 5, 5))
    B1 = np.zeros((M, 5, 5))
    B0[:, 0, 0] = 1.0
    B0[:, 0, 1:4] = B0[:, 1:4, 0] = (ndp / u0**2)[:, None] * u
    B0[:, 1:4, 1:4] = (ndp * enth / c**2)[:, None, None] * (eye - uu)
    B0[:, 4, 4] = u0 / c
    u1 = u[:, 0]
    B1[:, 0, 0] = c / u0 * u1
    B1[:, 0, 1] = B1[:, 1, 0] = c / u0 * ndp
    B1[:, 1:4, 1:4] = (ndp * enth / (c * u0) * u1)[:, None, None] * (eye - uu)
    B1[:, 4, 4] = u1
    return B0, B1


def cls_coefficients(W):
    r"""Batched :math:`D_0` and :math:`D_1` for classical values ``W``.

    :math:`\rho = (2\pi\mathcal P)^{3/5}e^{1-2\eta/5}` and :math:`\sigma^2\rho = 5\mathcal P/3`.
    """
    P, u, eta = W[0], W[1:4].T, W[4]
    rho = (2.0 * np.pi * P) ** 0.6 * np.exp(1.0 - 0.4 * eta)
    s2rho = 5.0 * P / 3.0
    M = P.size
    D0 = np.zeros((M, 5, 5))
    D1 = np.zeros((M, 5, 5))
    D0[:, 0, 0] = D0[:, 4, 4] = 1.0
    D1[:, 0, 0] = D1[:, 4, 4] = u[:, 0]
    D1[:, 0, 1] = D1[:, 1, 0] = s2rho
    for k in range(1, 4):
        D0[:, k, k] = s2rho * rho
        D1[:, k, k] = s2rho * rho * u[:, 0]
    return D0, D1


def _coefficients(V, c):
    return cls_coefficients(V) if c is None else rel_coefficients(V, c)


def _ddx(V, dx):
    return (8.0 * (np.roll(V, -1, axis=1) - np.roll(V, 1, axis=1))
            - (np.roll(V, -2, axis=1) - np.roll(V, 2, axis=1))) / (12.0 * dx)


def time_derivative(field):
    r""":math:`\partial_tV = -B_0^{-1}B_1\partial_xV` and :math:`\partial_xV`, both shape ``(5, M)``."""
    A0, A1 = _coefficients(field.V, field.c)
    Vx = _ddx(field.V, field.dx)
    rhs = np.einsum("kij,jk->ki", A1, Vx)
    Vt = -np.linalg.solve(A0, rhs[:, :, None])[:, :, 0].T
    return Vt, Vx


def max_wave_speed(field):
    """Largest characteristic speed, the spectral radius of the symmetric pencil."""
    A0, A1 = _coefficients(field.V, field.c)
    L = np.linalg.cholesky(A0)
    Li = np.linalg.inv(L)
    S = Li @ A1 @ np.swapaxes(Li, 1, 2)
    S = 0.5 * (S + np.swapaxes(S, 1, 2))
    return float(np.abs(np.linalg.eigvalsh(S)).max())


def _rhs(V, field):
    try:
        tmp = field.replace(V, field.t)
    except BlowUpError:
        raise
    return time_derivative(tmp)[0]


def _rk4(field, dt, cfl, check_cfl):
    if dt <= 0:
        raise UsageError("dt must be positive")
    if check_cfl:
        lam = max_wave_speed(field)
        if dt * lam > cfl * field.dx:
            raise UsageError(
                f"CFL violated: dt={dt:.3e} exceeds {cfl} dx / lambda_max = {cfl * field.dx / lam:.3e}"
            )
    V = field.V
    try:
        k1 = _rhs(V, field)
        k2 = _rhs(V + 0.5 * dt * k1, field)
        k3 = _rhs(V + 0.5 * dt * k2, field)
        k4 = _rhs(V + dt * k3, field)
    except ConvergenceError as exc:
        raise BlowUpError("closure failed during the step", {"t": field.t, **exc.diagnostics}) from exc
    return field.replace(V + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), field.t + dt)


def step_rel_euler(field, dt, cfl=1.0, check_cfl=True):
    """One RK4 step of the relativistic system.

    Raises
    ------
    UsageError
        ``dt`` above ``cfl * dx / lambda_max`` or a classical field.
    BlowUpError
        Loss of positivity or closure failure.
    """
    if not field.relativistic:
        raise UsageError("step_rel_euler needs a relativistic field")
    return _rk4(field, dt, cfl, check_cfl)


def step_cls_euler(field, dt, cfl=1.0, check_cfl=True):
    """One RK4 step of the classical system; errors as :func:`step_rel_euler`."""
    if field.relativistic:
        raise UsageError("step_cls_euler needs a classical field")
    return _rk4(field, dt, cfl, check_cfl)


def evolve(field, t_end, dt, cfl=1.0, check_every=10, callback=None):
    """Advance ``field`` to ``t_end`` with fixed steps (the last one shortened).

    The CFL condition is rechecked every ``check_every`` steps.  ``callback``
    receives each new field.
    """
    step = step_cls_euler if field.c is None else step_rel_euler
    n = int(math.ceil((t_end - field.t) / dt - 1e-12))
    for k in range(n):
        h = min(dt, t_end - field.t)
        field = step(field, h, cfl, check_cfl=(k % check_every == 0))
        if callback is not None:
            callback(field)
    return field


def newtonian_limit_experiment(c_list=(10.0, 20.0, 40.0, 80.0), M=256, t_end=0.5, init=None,
                               cfl_number=0.5, sample_every=1):
    r"""Run both systems from shared data and fit :math:`\sup_t\|W-V\|_\infty \sim c^{s}`.

    Parameters
    ----------
    c_list : sequence of float
    M : int
        Grid cells.
    t_end : float
    init : GridField, optional
        Shared initial values; defaults to :func:`initial_field`.
    cfl_number : float
        Time step as a fraction of ``dx / lambda_max`` of the classical data,
        shared by every run so discretization errors match.
    sample_every : int
        Gap sampling stride in steps.

    Returns
    -------
    LimitReport
    """
    if init is None:
        init = initial_field(M)
    W0 = GridField(init.V, 0.0, None, init.length)
    lam = max_wave_speed(W0)
    dt = cfl_number * W0.dx / lam
    n_steps = int(math.ceil(t_end / dt - 1e-12))

    cls_traj = []
    W = W0
    cls_traj.append(W.V)
    for k in range(n_steps):
        W = step_cls_euler(W, min(dt, t_end - W.t), cfl=1.0, check_cfl=(k % 10 == 0))
        cls_traj.append(W.V)

    c_arr = np.asarray(c_list, dtype=float)
    gaps = np.zeros(c_arr.size)
    comp = np.zeros((c_arr.size, 5))
    times = dt * np.arange(n_steps + 1)
    times[-1] = t_end
    series = np.zeros((c_arr.size, n_steps + 1))
    for i, c in enumerate(c_arr):
        V = GridField(init.V, 0.0, float(c), init.length)
        for k in range(n_steps + 1):
            if k > 0:
                V = step_rel_euler(V, min(dt, t_end - V.t), cfl=1.0, check_cfl=(k % 10 == 1))
            d = np.abs(V.V - cls_traj[k]).max(axis=1)
            comp[i] = np.maximum(comp[i], d)
            series[i, k] = d.max()
        gaps[i] = comp[i].max()
    slope, r2 = _loglog_fit(c_arr, gaps)
    return LimitReport(c_arr, gaps, comp, slope, r2, times, series)


def _loglog_fit(x, y):
    lx, ly = np.log(x), np.log(y)
    A = np.stack([lx, np.ones_like(lx)], axis=1)
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    ss = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 - float(resid @ resid) / ss if ss > 0 else 1.0
    return float(coef[0]), r2


def fluid_derivatives(field, index):
    r"""State and space-time derivatives of :math:`(n_0, u, T_0)` at one cell.

    Time derivatives come from the Euler system itself.  Returns
    ``(state, d_dt, d_dx)`` where each derivative is a tuple
    ``(dn0, du, dT0)``.
    """
    if not field.relativistic:
        raise UsageError("fluid_derivatives needs a relativistic field")
    Vt, Vx = time_derivative(field)
    v = field.V[:, index]
    state = state_from_PS(v[0], v[4], field.c, v[1:4])
    d = thermo_derivatives(state)

    def convert(dV):
        dn = d.n_P * dV[0] + d.n_S * dV[4]
        dT = d.T_P * dV[0] + d.T_S * dV[4]
        return dn, np.array(dV[1:4]), dT

    return state, convert(Vt[:, index]), convert(Vx[:, index])


def write_timeseries_csv(path, report):
    """Long-format CSV ``c, t, gap`` of the sup-norm gap series."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["c", "t", "gap"])
        for i, c in enumerate(report.c):
            for t, g in zip(report.times, report.series[i]):
                w.writerow([repr(float(c)), repr(float(t)), repr(float(g))])
