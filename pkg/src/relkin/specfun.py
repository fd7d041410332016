r"""Modified Bessel functions and the Bessel-ratio functions of :math:`\gamma`.

The modified Bessel function of the second kind is evaluated from its integral
representation

.. math::
    K_j(z) = \frac{(z/2)^j \Gamma(1/2)}{\Gamma(j+1/2)}
             \int_1^\infty e^{-zt} (t^2-1)^{j-1/2}\, dt ,

which after :math:`t=\cosh s` has the smooth integrand
:math:`e^{-z\cosh s}\sinh^{2j}s`.  For large arguments the Hankel asymptotic
series

.. math::
    K_j(z) = \sqrt{\frac{\pi}{2z}} e^{-z}
             \Big(\sum_{m<n} A_{j,m} z^{-m} + \gamma_{j,n}(z) z^{-n}\Big),
    \qquad A_{j,m} = \frac{1}{m!\,8^m}\prod_{k=1}^m \big(4j^2-(2k-1)^2\big),

is used whenever its remainder bound certifies full accuracy.

All functions of :math:`\gamma = c^2/T_0` (the ratio
:math:`\phi = K_3/K_2` and the quantities built from it) are computed from
scaled values :math:`e^z K_j(z)`.  For :math:`\gamma \ge 25` they are evaluated
from exact rational Laurent expansions in :math:`1/\gamma`, which removes the
cancellations that otherwise cost :math:`\log_{10}\gamma^2` digits.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
import math

import numpy as np

from ._series import Laurent, evaluate
from .errors import DomainError

__all__ = [
    "AsymptoticResult",
    "asymptotic_coefficient",
    "bessel_k",
    "bessel_ke",
    "bessel_k_asymptotic",
    "bessel_i0",
    "bessel_i0e",
    "ratio_k32",
    "ratio_k12",
    "varphi",
    "varphi_prime",
    "a_hat",
    "sound_ratio",
    "hfrak",
    "gamma_delta",
    "energy_variance",
    "J_MAX",
]

J_MAX = 8
_ASYM_SWITCH = 30.0
_SERIES_SWITCH = 25.0
_SERIES_ORDER = 44
_NMAX = 60


@dataclass(frozen=True)
class AsymptoticResult:
    """Truncated asymptotic series for :math:`K_j(z)`.

    Attributes
    ----------
    value : float
        Partial sum :math:`\\sqrt{\\pi/2z}e^{-z}\\sum_{m<n} A_{j,m}z^{-m}`.
    remainder_bound : float
        Absolute bound on ``K_j(z) - value``.
    terms_used : int
        Number of terms ``n`` in the partial sum.
    """

    value: float
    remainder_bound: float
    terms_used: int


def _check_order(j):
    if int(j) != j or not 0 <= j <= J_MAX:
        raise DomainError(f"order j must be an integer in [0, {J_MAX}], got {j}")
    return int(j)


def _check_positive(z, name="z"):
    z = np.asarray(z, dtype=float)
    if np.any(~(z > 0)):
        raise DomainError(f"{name} must be positive and finite")
    if np.any(~np.isfinite(z)):
        raise DomainError(f"{name} must be finite")
    return z


def _scalar_or_array(x, like):
    if np.ndim(like) == 0:
        return float(x)
    return x


@lru_cache(maxsize=None)
def _exact_coefficients(j, nmax=_NMAX):
    coef = [Fraction(1)]
    num = Fraction(1)
    for m in range(1, nmax + 1):
        num *= Fraction(4 * j * j - (2 * m - 1) ** 2, 8 * m)
        coef.append(num)
    return tuple(coef)


@lru_cache(maxsize=None)
def _float_coefficients(j):
    return np.array([float(c) for c in _exact_coefficients(j)])


def asymptotic_coefficient(j, m):
    """Exact coefficient :math:`A_{j,m}` as a :class:`fractions.Fraction`."""
    if m < 0 or m > _NMAX:
        raise DomainError(f"m must be in [0, {_NMAX}]")
    return _exact_coefficients(int(j))[m]


def _remainder_factor(j, n, z):
    # |gamma_{j,n}| <= |A_{j,n}| when j <= n + 1/2, else 2|A_{j,n}|exp((j^2-1/4)/z)
    a = abs(_float_coefficients(j)[n])
    if j <= n + 0.5:
        return a * np.ones_like(z)
    return 2.0 * a * np.exp((j * j - 0.25) / z)


def bessel_k_asymptotic(j, z, n):
    """Truncated Hankel series for :math:`K_j(z)` with a rigorous remainder bound.

    Parameters
    ----------
    j : int
        Nonnegative integer order.
    z : float
        Positive argument.
    n : int
        Number of retained terms, ``1 <= n <= 60``.

    Returns
    -------
    AsymptoticResult
    """
    if int(j) != j or j < 0:
        raise DomainError("order must be a nonnegative integer")
    j = int(j)
    z = float(_check_positive(z))
    if not 1 <= n <= _NMAX:
        raise DomainError(f"n must be in [1, {_NMAX}]")
    a = _float_coefficients(j)
    powers = z ** -np.arange(n)
    lead = math.sqrt(math.pi / (2 * z)) * math.exp(-z)
    value = lead * float(np.dot(a[:n], powers))
    bound = lead * float(_remainder_factor(j, n, np.float64(z))) * z**-n
    return AsymptoticResult(value, bound, n)


def _asymptotic_scaled(j, z):
    """Best truncation of the scaled series; returns (value, relative bound)."""
    a = _float_coefficients(j)
    m = np.arange(_NMAX + 1)
    zc = z[:, None]
    terms = a[None, :] * zc ** -m[None, :]
    partial = np.cumsum(terms, axis=1)
    fac = np.where(j <= m + 0.5, 1.0, 2.0 * np.exp((j * j - 0.25) / zc))
    bound = np.abs(terms) * fac  # bound when n terms retained, n = m
    best = np.argmin(bound[:, 1:], axis=1) + 1
    rows = np.arange(z.size)
    s = partial[rows, best - 1]
    rel = bound[rows, best] / np.abs(s)
    return np.sqrt(np.pi / (2 * z)) * s, rel


@lru_cache(maxsize=None)
def _gauss_legendre(n):
    return np.polynomial.legendre.leggauss(n)


def _log_integrand(j, z, s):
    out = -z * (np.cosh(s) - 1.0)
    if j > 0:
        out = out + 2 * j * np.log(np.sinh(s))
    return out


def _quadrature_scaled(j, z, panels=32, order=20):
    """Scaled :math:`e^z K_j(z)` by composite Gauss-Legendre in ``s``."""
    z = np.asarray(z, dtype=float)
    if j == 0:
        s_peak = np.zeros_like(z)
        g_peak = np.zeros_like(z)
    else:
        a = 2.0 * j / z
        w = 0.5 * (a + np.sqrt(a * a + 4.0))
        s_peak = np.arccosh(w)
        g_peak = _log_integrand(j, z, s_peak)
    target = g_peak - 46.0
    hi = s_peak + 1.0
    for _ in range(200):
        low = _log_integrand(j, z, hi) > target
        if not np.any(low):
            break
        hi = np.where(low, hi + 2.0 * (hi - s_peak), hi)
    lo = s_peak.copy()
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        above = _log_integrand(j, z, mid) > target
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    s_hi = hi
    x, wts = _gauss_legendre(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    a_, b_ = edges[:-1], edges[1:]
    t = (0.5 * (b_ - a_)[:, None] * (x[None, :] + 1.0) + a_[:, None]).ravel()
    wt = (0.5 * (b_ - a_)[:, None] * wts[None, :]).ravel()
    s = s_hi[..., None] * t
    with np.errstate(divide="ignore"):
        vals = np.exp(_log_integrand(j, z[..., None], s) - g_peak[..., None])
    integral = s_hi * np.sum(vals * wt, axis=-1)
    logpref = j * np.log(z / 2.0) + 0.5 * math.log(math.pi) - math.lgamma(j + 0.5)
    return np.exp(logpref + g_peak + np.log(integral))


def bessel_ke(j, z):
    r"""Exponentially scaled :math:`e^{z}K_j(z)`, relative accuracy about 1e-13.

    Parameters
    ----------
    j : int
        Order, ``0 <= j <= 8``.
    z : float or array_like
        Positive argument(s).
    """
    j = _check_order(j)
    z_in = z
    z = np.atleast_1d(_check_positive(z)).astype(float)
    out = np.empty_like(z)
    use_asym = z > _ASYM_SWITCH
    if np.any(use_asym):
        val, rel = _asymptotic_scaled(j, z[use_asym])
        ok = rel < 1e-13
        idx = np.flatnonzero(use_asym)
        out[idx[ok]] = val[ok]
        use_asym[idx[~ok]] = False
    rest = ~use_asym
    if np.any(rest):
        coarse = _quadrature_scaled(j, z[rest], panels=24)
        fine = _quadrature_scaled(j, z[rest], panels=48)
        bad = np.abs(coarse - fine) > 1e-13 * np.abs(fine)
        if np.any(bad):
            sub = z[rest][bad]
            fine[bad] = _quadrature_scaled(j, sub, panels=192)
        out[rest] = fine
    return _scalar_or_array(out.reshape(np.shape(z_in)) if np.ndim(z_in) else out[0], z_in)


def bessel_k(j, z):
    r"""Modified Bessel function of the second kind :math:`K_j(z)`.

    Parameters
    ----------
    j : int
        Order, ``0 <= j <= 8``.
    z : float or array_like
        Positive argument(s).

    Returns
    -------
    float or ndarray
        :math:`K_j(z)`; underflows to zero for ``z`` beyond about 700, use
        :func:`bessel_ke` there.

    Examples
    --------
    >>> round(bessel_k(1, 1.0), 8)
    0.60190723
    """
    ke = bessel_ke(j, z)
    return ke * np.exp(-np.asarray(z, dtype=float)) if np.ndim(z) else ke * math.exp(-z)


def bessel_i0e(r):
    r"""Scaled :math:`e^{-r} I_0(r)` for :math:`r \ge 0`.

    Uses the trapezoid rule on :math:`\frac{1}{\pi}\int_0^\pi e^{r(\cos\Theta-1)}d\Theta`
    (spectrally accurate for periodic integrands) for ``r <= 40`` and the
    large-argument series beyond.
    """
    r_in = r
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(~(r >= 0)) or np.any(~np.isfinite(r)):
        raise DomainError("r must be nonnegative and finite")
    out = np.empty_like(r)
    small = r <= 40.0
    if np.any(small):
        n = 160
        theta = np.pi * (np.arange(n) + 0.5) / n  # midpoint rule, same accuracy
        vals = np.exp(r[small, None] * (np.cos(theta)[None, :] - 1.0))
        out[small] = vals.mean(axis=1)
    if np.any(~small):
        rb = r[~small]
        term = np.ones_like(rb)
        acc = np.ones_like(rb)
        for k in range(1, 40):
            term = term * (2 * k - 1) ** 2 / (8.0 * k * rb)
            acc = acc + term
        out[~small] = acc / np.sqrt(2 * np.pi * rb)
    if np.ndim(r_in) == 0:
        return float(out[0])
    return out.reshape(np.shape(r_in))


def bessel_i0(r):
    """Modified Bessel function of the first kind :math:`I_0(r)`."""
    val = bessel_i0e(r)
    return val * np.exp(r) if np.ndim(r) else val * math.exp(r)


# ---------------------------------------------------------------------------
# functions of gamma

def _expr_phi(g, x, k1, k2, k3):
    return k3 / k2


def _expr_r(g, x, k1, k2, k3):
    return k1 / k2


def _expr_varphi(g, x, k1, k2, k3):
    phi = k3 / k2
    return g * g * (phi * phi - 5 * phi * x - 1 + x * x)


def _expr_a_hat(g, x, k1, k2, k3):
    phi = k3 / k2
    return phi - 6 * x - 1 / phi


def _expr_sound(g, x, k1, k2, k3):
    r = k1 / k2
    inv = g * r + 3 + (g * r * r + 4 * r - g) / (g * r * r + 3 * r - g - 4 * x)
    return g / inv


def _expr_hfrak(g, x, k1, k2, k3):
    phi = k3 / k2
    psi = 1 + 6 * phi * x - phi * phi
    return psi - psi * x / phi - phi * x


def _expr_gdelta(g, x, k1, k2, k3):
    return g * (k3 - k2) / k2


def _expr_energy_var(g, x, k1, k2, k3):
    phi = k3 / k2
    return g * (3 * phi + 2 - 2 * g * (phi - 1))


_EXPRESSIONS = {
    "phi": _expr_phi,
    "r": _expr_r,
    "varphi": _expr_varphi,
    "a_hat": _expr_a_hat,
    "sound": _expr_sound,
    "hfrak": _expr_hfrak,
    "gdelta": _expr_gdelta,
    "energy_var": _expr_energy_var,
}


@lru_cache(maxsize=None)
def _series_exact(name):
    prec = _SERIES_ORDER
    x = Laurent.x(prec)
    if name == "varphi_prime":
        # d/dgamma = -x^2 d/dx with x = 1/gamma
        return _series_exact("varphi").derivative() * (-(x * x))
    ks = [Laurent(_exact_coefficients(j)[:prec], 0, prec) for j in (1, 2, 3)]
    return _EXPRESSIONS[name](1 / x, x, *ks)


@lru_cache(maxsize=None)
def _series(name):
    return _series_exact(name).to_float()


def _direct_varphi_prime(g, x, k1, k2, k3):
    # reduced form 3 phi + 2 phi varphi - 3 (varphi - 1) / gamma
    phi = k3 / k2
    vphi = _expr_varphi(g, x, k1, k2, k3)
    return 3 * phi + 2 * phi * vphi - 3 * (vphi - 1) * x


def _gamma_function(name, gamma):
    gamma_in = gamma
    gamma = np.atleast_1d(_check_positive(gamma, "gamma")).astype(float)
    out = np.empty_like(gamma)
    big = gamma >= _SERIES_SWITCH
    if np.any(big):
        val, coef = _series(name)
        out[big] = evaluate(val, coef, 1.0 / gamma[big])
    if np.any(~big):
        gs = gamma[~big]
        ks = [bessel_ke(j, gs) for j in (1, 2, 3)]
        expr = _direct_varphi_prime if name == "varphi_prime" else _EXPRESSIONS[name]
        out[~big] = expr(gs, 1.0 / gs, *ks)
    if np.ndim(gamma_in) == 0:
        return float(out[0])
    return out.reshape(np.shape(gamma_in))


def ratio_k32(gamma):
    r"""Ratio :math:`\phi(\gamma) = K_3(\gamma)/K_2(\gamma)`.

    Large-argument behaviour: :math:`\phi = 1 + 5/(2\gamma) + 15/(8\gamma^2) + O(\gamma^{-3})`.
    """
    return _gamma_function("phi", gamma)


def ratio_k12(gamma):
    r"""Ratio :math:`K_1(\gamma)/K_2(\gamma)`."""
    return _gamma_function("r", gamma)


def gamma_delta(gamma):
    r"""Cancellation-free :math:`\gamma(\phi(\gamma) - 1)`, tending to 5/2."""
    return _gamma_function("gdelta", gamma)


def varphi(gamma):
    r"""The function :math:`\gamma^2(\phi^2 - 5\phi/\gamma - 1 + 1/\gamma^2)`.

    Negative for all :math:`\gamma>0` and tends to :math:`-3/2`.
    """
    return _gamma_function("varphi", gamma)


def varphi_prime(gamma):
    r"""Derivative of :func:`varphi`, :math:`15/(4\gamma^2) + O(\gamma^{-3})`.

    Uses :math:`\phi' = \phi^2 - 5\phi/\gamma - 1`, so that

    .. math::
        \frac{d}{d\gamma}\varphi = 2\gamma(\phi^2-1) + 2\gamma^2(\phi-1)\phi'
        + (2\gamma^2 - 5\gamma)\phi' - 5\phi .
    """
    return _gamma_function("varphi_prime", gamma)


def a_hat(gamma):
    r""":math:`\hat A(\gamma) = K_3/K_2 - 6/\gamma - K_2/K_3`, asymptotically :math:`-1/\gamma`."""
    return _gamma_function("a_hat", gamma)


def sound_ratio(gamma):
    r"""Squared sound speed over temperature, :math:`a^2/T_0`.

    With :math:`r = K_1/K_2`,

    .. math::
        \Big(\frac{\partial P_0}{\partial e_0}\Big|_S\Big)^{-1}
        = \gamma r + 3 + \frac{\gamma r^2 + 4r - \gamma}{\gamma r^2 + 3r - \gamma - 4/\gamma}

    and :math:`a^2/T_0 = \gamma\,\partial P_0/\partial e_0|_S \to 5/3`.
    """
    return _gamma_function("sound", gamma)


def hfrak(gamma):
    r""":math:`\Psi - \Psi/(\gamma\phi) - \phi/\gamma` with :math:`\Psi = 1 + 6\phi/\gamma - \phi^2`."""
    return _gamma_function("hfrak", gamma)


def energy_variance(gamma):
    r"""Scaled rest-frame moment :math:`\gamma^2\langle(p^0/c-1)^2\rangle/n_0`.

    Equals :math:`\gamma(3\phi + 2 - 2\gamma(\phi-1))` and tends to 15/4.
    The direct expression cancels to :math:`O(\gamma^{-1})` relative, so the
    exact rational series is used for large :math:`\gamma`.
    """
    return _gamma_function("energy_var", gamma)
