import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relkin import equilibria as eq
from relkin import specfun
from relkin.errors import ConvergenceError, DomainError


@pytest.fixture(params=[(1.0, (0.0, 0.0, 0.0), 1.0, 5.0), (0.7, (0.4, -0.3, 0.9), 1.3, 8.0)])
def state(request):
    n0, u, T0, c = request.param
    return eq.RelFluidState(n0, np.array(u), T0, c)


def test_state_validation():
    with pytest.raises(DomainError):
        eq.RelFluidState(-1.0, np.zeros(3), 1.0, 1.0)
    with pytest.raises(DomainError):
        eq.ClsFluidState(1.0, np.zeros(3), 0.0)


def test_juttner_normalization_and_moments(state):
    mq = eq.moments_by_quadrature(state)
    mc = eq.moments(state)
    assert np.allclose(mq.I, mc.I, rtol=1e-10, atol=1e-12 * abs(mc.I[0]))
    assert np.allclose(mq.T2, mc.T2, rtol=1e-9, atol=1e-11 * abs(mc.T2).max())
    assert np.allclose(mq.T3, mc.T3, rtol=1e-9, atol=1e-11 * abs(mc.T3).max())
    # n0 = -I^mu u_mu / c ... the rest-frame density
    assert mc.I[0] * state.c / state.u0 == pytest.approx(state.n0, rel=1e-14)


def test_third_moment_two_routes(state):
    assert np.allclose(eq.third_moment_closed_form(state), eq.moments(state).T3,
                       rtol=1e-12, atol=1e-13 * abs(eq.moments(state).T3).max())


def test_pressure_and_energy_against_mpmath():
    st_ = eq.RelFluidState(1.0, np.zeros(3), 2.0, 3.0)
    g = mp.mpf(9) / 2
    with mp.workdps(30):
        phi = mp.besselk(3, g) / mp.besselk(2, g)
    assert st_.e0 == pytest.approx(float(9 * phi - 2), rel=1e-13)
    assert st_.P0 == 2.0


def test_global_juttner_matches_local_at_rest():
    st_ = eq.RelFluidState(1.5, np.zeros(3), 0.8, 6.0)
    p = np.array([[0.3, 0.2, -1.0], [2.0, 0.0, 0.0]])
    assert np.allclose(eq.global_juttner(1.5, 0.8, 6.0, p), eq.juttner(st_, p), rtol=1e-13)


def test_juttner_tends_to_maxwellian():
    cls = eq.ClsFluidState(1.2, np.array([0.5, 0.0, -0.2]), 0.9)
    p = np.array([[0.0, 0.0, 0.0], [1.0, -1.0, 0.5]])
    gaps = []
    for c in (50.0, 100.0, 200.0):
        rel = eq.juttner(eq.RelFluidState(1.2, cls.u, 0.9, c), p)
        gaps.append(np.abs(rel - eq.classical_maxwellian(cls, p)).max())
    assert gaps[0] / gaps[1] == pytest.approx(4.0, rel=0.1)
    assert gaps[1] / gaps[2] == pytest.approx(4.0, rel=0.1)


def test_entropy_limit():
    # S - eta -> 0 as c grows, at equal density and temperature
    d = [abs(float(eq.rel_entropy(1.0, 1.0, c)) - float(eq.cls_entropy(1.0, 1.0))) for c in (10.0, 100.0)]
    assert d[1] < d[0] / 50


@given(st.floats(0.1, 10.0), st.floats(-3.0, 6.0), st.sampled_from([1.0, 10.0, 1e3]))
@settings(max_examples=60, deadline=None)
def test_state_from_PS_roundtrip(P, S, c):
    try:
        s = eq.state_from_PS(P, S, c)
    except ConvergenceError:
        return
    assert s.P0 == pytest.approx(P, rel=1e-12)
    assert s.S == pytest.approx(S, rel=1e-11, abs=1e-11)


def test_solve_gamma_vectorized_and_unbracketed():
    g = eq.solve_gamma_PS(np.array([1.0, 2.0]), np.array([2.0, 2.5]), 10.0)
    assert g.shape == (2,)
    with pytest.raises(ConvergenceError):
        eq.solve_gamma_PS(1.0, 300.0, 1.0)


def test_state_from_Peta_roundtrip():
    cls = eq.state_from_Peta(1.3, 2.1)
    assert cls.P == pytest.approx(1.3)
    assert cls.eta == pytest.approx(2.1)


def test_sound_speeds():
    st_ = eq.RelFluidState(1.0, np.zeros(3), 1.0, 1e4)
    assert eq.sound_speed_rel(st_) == pytest.approx(math.sqrt(5 / 3), rel=1e-6)
    assert eq.sound_speed_cls(eq.ClsFluidState(1.0, np.zeros(3), 1.0)) == pytest.approx(math.sqrt(5 / 3))
    assert eq.sound_speed_rel(eq.RelFluidState(1.0, np.zeros(3), 1.0, 1.0)) < 1.0


def test_thermo_derivatives_finite_difference():
    c = 4.0
    st_ = eq.state_from_PS(1.1, 2.3, c)
    d = eq.thermo_derivatives(st_)
    h = 1e-5

    def nT(P, S):
        s = eq.state_from_PS(P, S, c)
        return np.array([s.n0, s.T0])

    dP = (nT(1.1 + h, 2.3) - nT(1.1 - h, 2.3)) / (2 * h)
    dS = (nT(1.1, 2.3 + h) - nT(1.1, 2.3 - h)) / (2 * h)
    assert [d.n_P, d.T_P] == pytest.approx(dP.tolist(), rel=1e-7)
    assert [d.n_S, d.T_S] == pytest.approx(dS.tolist(), rel=1e-7)
    h2 = 1e-3
    dPP = (nT(1.1 + h2, 2.3) - 2 * nT(1.1, 2.3) + nT(1.1 - h2, 2.3)) / h2**2
    dSS = (nT(1.1, 2.3 + h2) - 2 * nT(1.1, 2.3) + nT(1.1, 2.3 - h2)) / h2**2
    assert [d.n_PP, d.T_PP] == pytest.approx(dPP.tolist(), rel=1e-4, abs=1e-6)
    assert [d.n_SS, d.T_SS] == pytest.approx(dSS.tolist(), rel=1e-4, abs=1e-6)


def test_juttner_log_derivative_finite_difference(rng):
    st_ = eq.RelFluidState(1.1, np.array([0.3, -0.2, 0.5]), 0.9, 6.0)
    dn, du, dT = 0.2, np.array([0.1, 0.4, -0.3]), -0.15
    p = rng.normal(size=(5, 3))
    h = 1e-6

    def lm(t):
        s = eq.RelFluidState(st_.n0 + t * dn, st_.u + t * du, st_.T0 + t * dT, st_.c)
        return eq.log_juttner(s, p)

    fd = (lm(h) - lm(-h)) / (2 * h)
    assert np.allclose(eq.juttner_log_derivative(st_, p, dn, du, dT), fd, rtol=1e-6, atol=1e-8)


def test_weight_w():
    assert eq.weight_w(2.0, np.array([1.0, 2.0, 2.0])) == pytest.approx(10.0)


def test_phi_property_consistency():
    st_ = eq.RelFluidState(1.0, np.zeros(3), 2.0, 3.0)
    assert st_.phi == specfun.ratio_k32(4.5)
    assert st_.enthalpy == pytest.approx((st_.e0 + st_.P0) / st_.n0)


def test_global_sandwich_bound(rng):
    # J/C <= M <= C J^alpha with alpha = 0.9, |u|/c = 0.01 and T_M inside the admissible window
    c, T0, n0, alpha = 20.0, 1.0, 1.0, 0.9
    u = np.array([0.2, 0.0, 0.0])
    st_ = eq.RelFluidState(n0, u, T0, c)
    T_M = 0.95 * T0

    def logs(p):
        lm = eq.log_juttner(st_, p)
        # log J directly, since J itself underflows in the far tail
        g = c * c / T_M
        p0 = np.sqrt(c * c + (p * p).sum(1))
        lj = np.log(n0 * g / (4 * np.pi * c**3 * specfun.bessel_ke(2, g))) - c * (p0 - c) / T_M
        return lj - lm, lm - alpha * lj

    cal = rng.normal(size=(4000, 3)) * rng.uniform(0, 20, 4000)[:, None] / np.sqrt(3)
    near = cal[:5]
    assert np.allclose(logs(near)[0], np.log(eq.global_juttner(n0, T_M, c, near)) - eq.log_juttner(st_, near))
    a, b = logs(cal)
    logC = max(a.max(), b.max()) + 1e-9
    test = rng.normal(size=(4000, 3))
    test *= (rng.uniform(0, 200, 4000) / np.linalg.norm(test, axis=1))[:, None]
    a, b = logs(test)
    assert a.max() <= logC and b.max() <= logC
