import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from relkin import kinematics as kin
from relkin.errors import UsageError

vec = arrays(np.float64, 3, elements=st.floats(-50, 50))
light = st.floats(1.0, 1e3)


def _minkowski(a, b):
    return -a[0] * b[0] + a[1:] @ b[1:]


@given(vec, vec, light)
@settings(max_examples=200, deadline=None)
def test_g_bounded_by_distance_and_s_identity(p, q, c):
    g = kin.rel_momentum_g(p, q, c)
    assert g <= np.linalg.norm(p - q) * (1 + 1e-12) + 1e-12
    P = kin.FourMomentum(p, c).four
    Q = kin.FourMomentum(q, c).four
    s_direct = -_minkowski(P + Q, P + Q)
    assert kin.total_s(p, q, c) == pytest.approx(s_direct, rel=1e-10, abs=1e-9 * c * c)


def test_g_zero_at_equal_momenta():
    p = np.array([1.0, -2.0, 0.5])
    assert kin.rel_momentum_g(p, p, 10.0) == 0.0


@given(vec, vec, light)
@settings(max_examples=200, deadline=None)
def test_moller_velocity_bounds(p, q, c):
    v = kin.moller_velocity(p, q, c)
    assert 0 <= v <= min(c, np.linalg.norm(p - q) / 2) * (1 + 1e-12) + 1e-300


def test_moller_newtonian_limit():
    p, q = np.array([1.0, 0, 0]), np.array([-0.5, 1.0, 0])
    assert kin.moller_velocity(p, q, 1e5) == pytest.approx(np.linalg.norm(p - q) / 2, rel=1e-8)


def test_minkowski_dot_and_mass_shell():
    P = kin.FourMomentum(np.array([3.0, 4.0, 0.0]), 2.0)
    assert kin.minkowski_dot(P, P) == pytest.approx(-4.0)
    with pytest.raises(UsageError):
        kin.minkowski_dot(P, kin.FourMomentum(np.zeros(3), 3.0))
    with pytest.raises(UsageError):
        kin.FourMomentum(np.zeros(2), 1.0)


@given(vec, arrays(np.float64, 3, elements=st.floats(-20, 20)), light)
@settings(max_examples=200, deadline=None)
def test_boost_roundtrip_and_invariance(p, u, c):
    b = kin.boost_from_velocity(u, c)
    assert np.allclose(b.matrix @ b.inverse, np.eye(4), atol=1e-9 * (1 + (u @ u) / c**2))
    pb, pb0 = kin.boost_to_rest(u, p, c)
    assert pb0 == pytest.approx(kin.energy(pb, c), rel=1e-12)
    back = b.matrix @ np.concatenate([[pb0], pb])
    ref = np.concatenate([[kin.energy(p, c)], p])
    assert np.allclose(back, ref, rtol=1e-10, atol=1e-10 * ref[0])


def test_boost_of_fluid_velocity_is_rest():
    u, c = np.array([0.3, -1.2, 2.0]), 5.0
    pb, pb0 = kin.boost_to_rest(u, u, c)
    assert np.allclose(pb, 0, atol=1e-14)
    assert pb0 == pytest.approx(c)


def test_boost_momentum_wrapper():
    u, c = np.array([1.0, 0.0, 0.0]), 4.0
    P = kin.FourMomentum(np.array([0.0, 2.0, 0.0]), c)
    Pb = kin.boost_momentum(kin.boost_from_velocity(u, c), P)
    assert kin.minkowski_dot(Pb, Pb) == pytest.approx(-c * c)


def test_boost_jacobian_finite_difference(rng):
    u, c = np.array([0.5, -0.3, 0.8]), 3.0
    p = rng.normal(size=3)
    J = kin.boost_jacobian(u, p, c)
    h = 1e-6
    fd = np.stack([(kin.boost_to_rest(u, p + h * e, c)[0] - kin.boost_to_rest(u, p - h * e, c)[0]) / (2 * h)
                   for e in np.eye(3)], axis=1)
    assert np.allclose(J, fd, atol=1e-8)


@given(vec, vec, arrays(np.float64, 3, elements=st.floats(-1, 1)), light)
@settings(max_examples=200, deadline=None)
def test_com_outgoing_conserves(p, q, w, c):
    n = np.linalg.norm(w)
    if n < 1e-3:
        return
    w = w / n
    pp, qq, pp0, qq0 = kin.com_outgoing(p, q, w, c)
    e = kin.energy(p, c) + kin.energy(q, c)
    assert np.allclose(pp + qq, p + q, atol=1e-10 * e)
    assert pp0 + qq0 == pytest.approx(e, rel=1e-12)
    assert pp0 == pytest.approx(kin.energy(pp, c), rel=1e-10, abs=1e-10 * e)
    assert qq0 == pytest.approx(kin.energy(qq, c), rel=1e-10, abs=1e-10 * e)
    assert kin.rel_momentum_g(pp, qq, c) == pytest.approx(kin.rel_momentum_g(p, q, c), rel=1e-7, abs=1e-7 * c)


def test_com_outgoing_rejects_non_unit():
    with pytest.raises(UsageError):
        kin.com_outgoing(np.zeros(3), np.ones(3), np.array([1.0, 1.0, 0.0]), 2.0)


def test_com_outgoing_batched_shapes(rng):
    p, q = rng.normal(size=(7, 3)), rng.normal(size=(7, 3))
    w = rng.normal(size=(7, 3))
    w /= np.linalg.norm(w, axis=1)[:, None]
    pp, qq, pp0, qq0 = kin.com_outgoing(p, q, w, 3.0)
    assert pp.shape == (7, 3) and pp0.shape == (7,)


def test_scattering_angle_forward_is_zero():
    p, q, c = np.array([1.0, 0, 0]), np.array([-1.0, 0, 0]), 5.0
    w = np.array([1.0, 0, 0])
    pp, qq, _, _ = kin.com_outgoing(p, q, w, c)
    assert kin.scattering_angle(p, q, pp, qq, c) == pytest.approx(0.0, abs=1e-6)


def test_large_c_guard():
    assert kin.large_c_guard(10.0, [2.0, 0, 0])
    assert not kin.large_c_guard(7.0, [2.0, 0, 0])
