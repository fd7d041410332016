import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from relkin import collision as col
from relkin.equilibria import ClsFluidState, RelFluidState, juttner
from relkin.errors import DomainError, UsageError
from relkin.kinematics import energy, moller_velocity
from relkin.quadrature import rest_frame_grid


@pytest.fixture
def ctx():
    return col.KernelContext(RelFluidState(1.2, np.array([0.4, -0.3, 0.2]), 0.9, 10.0))


def test_kc2_matches_oracle(ctx, rng):
    p = ctx.state.u + rng.normal(size=(8, 3))
    q = ctx.state.u + rng.normal(size=(8, 3))
    closed = col.kernel_kc2(ctx, p, q).value
    ref = [col.kernel_kc2_oracle(ctx, a, b) for a, b in zip(p, q)]
    assert np.allclose(closed, ref, rtol=1e-9)


@pytest.mark.parametrize("lam", [0.3, 0.7])
def test_xi_kernel_matches_oracle(ctx, lam):
    p, q = np.array([0.5, 1.0, -0.2]), np.array([-1.0, 0.3, 0.8])
    assert col.xi_kernel(ctx, p, q, lam) == pytest.approx(col.kernel_kc2_oracle(ctx, p, q, lam=lam), rel=1e-9)
    assert col.xi_kernel(ctx, p, q, 0.0) == col.kernel_kc2(ctx, p, q).value
    with pytest.raises(UsageError):
        col.xi_kernel(ctx, p, q, 1.0)


def test_kernels_symmetric(ctx, rng):
    p, q = rng.normal(size=(6, 3)), rng.normal(size=(6, 3))
    assert np.allclose(col.kernel_kc1(ctx, p, q), col.kernel_kc1(ctx, q, p), rtol=1e-13)
    assert np.allclose(col.kernel_kc2(ctx, p, q).value, col.kernel_kc2(ctx, q, p).value, rtol=1e-12)


def test_kc2_singular_at_diagonal(ctx):
    p = np.array([1.0, 0.0, 0.0])
    with pytest.raises(DomainError):
        col.kernel_kc2(ctx, p, p)
    with pytest.raises(DomainError):
        col.newtonian_k2(ClsFluidState(1.0, np.zeros(3), 1.0), p, p)


def test_kc1_formula(ctx):
    p, q = np.array([0.3, 0.1, 0.0]), np.array([-0.5, 1.0, 0.4])
    c = ctx.c
    v = moller_velocity(p, q, c)
    m = np.sqrt(juttner(ctx.state, p) * juttner(ctx.state, q))
    assert col.kernel_kc1(ctx, p, q) == pytest.approx(4 * np.pi * v * m, rel=1e-12)


def test_kc2_finite_at_large_c():
    ctx = col.KernelContext.from_values(1.0, (0.1, 0.0, 0.0), 1.0, 1e4)
    v = col.kernel_kc2(ctx, np.array([0.5, 0.0, 0.0]), np.array([-0.5, 0.2, 0.0])).value
    assert np.isfinite(v) and v > 0


@given(arrays(np.float64, 3, elements=st.floats(-3, 3)), arrays(np.float64, 3, elements=st.floats(-3, 3)))
@settings(max_examples=50, deadline=None)
def test_kernels_positive(p, q):
    if np.linalg.norm(p - q) < 1e-6:
        return
    ctx = col.KernelContext.from_values(1.0, (0.2, 0.1, 0.0), 1.0, 20.0)
    assert col.kernel_kc1(ctx, p, q) >= 0
    assert col.kernel_kc2(ctx, p, q).value > 0


def test_collision_frequency_against_rest_grid(ctx):
    # nu(p) = 4 pi int v_phi M dq by a plain tensor rule as reference
    p = np.array([0.7, -0.2, 0.4])
    g = rest_frame_grid(ctx.state.u, ctx.c, ctx.state.T0, 64, 24, 48)
    ref = 4 * np.pi * g.integrate(moller_velocity(p, g.nodes, ctx.c) * juttner(ctx.state, g.nodes))
    assert col.collision_frequency(ctx, p) == pytest.approx(ref, rel=1e-6)
    far = np.array([60.0, 0.0, 0.0])
    assert col.collision_frequency(ctx, far, col.QuadratureSpec(method="rest")) > 0
    with pytest.raises(UsageError):
        col.collision_frequency(ctx, p, col.QuadratureSpec(method="bogus"))


def test_linearized_operator_annihilates_collision_invariants(ctx):
    # nu(p) psi(p) = int (2 k_c2 - k_c1)(p, q) psi(q) dq for psi = sqrt(M) {1, p, p0}
    st_ = ctx.state
    p = np.array([0.6, -0.1, 0.9])
    nu = col.collision_frequency(ctx, p)
    nodes, w = col._shell_nodes(p, 25.0, 24, 24, 48)
    k = 2 * col.kernel_kc2(ctx, p, nodes).value - col.kernel_kc1(ctx, p, nodes)
    sq = np.sqrt(juttner(st_, nodes))
    for phi_q, phi_p in [(1.0, 1.0), (nodes[:, 0], p[0]), (energy(nodes, ctx.c), energy(p, ctx.c))]:
        gain = (k * sq * phi_q) @ w
        loss = nu * np.sqrt(juttner(st_, p)) * phi_p
        assert gain == pytest.approx(loss, rel=1e-8)


def test_newtonian_self_difference_is_zero(ctx):
    cls = ClsFluidState(1.2, ctx.state.u, 0.9)
    spec = col.QuadratureSpec(8, 8, 16, rtol=1e-3)
    assert col.kernel_l1_difference(ctx, cls, "k1", np.zeros(3), spec, self_check=True) == 0.0
    with pytest.raises(UsageError):
        col.kernel_l1_difference(ctx, cls, "k3", np.zeros(3), spec)


def test_kernel_l1_difference_decreases():
    cls = ClsFluidState(1.0, np.zeros(3), 1.0)
    spec = col.QuadratureSpec(16, 16, 32, rtol=1e-4, max_refine=4)
    p = np.array([0.5, 0.0, 0.0])
    v = [col.kernel_l1_difference(col.KernelContext.from_values(1.0, (0, 0, 0), 1.0, c), cls, "k1", p, spec)
         for c in (20.0, 40.0)]
    assert v[1] < v[0] / 2


def test_weighted_kernel_integral(ctx):
    spec = col.QuadratureSpec(12, 12, 24, rtol=1e-4, max_refine=4)
    p = np.array([0.5, 0.0, 0.0])
    base = col.weighted_kernel_integral(ctx, "kc1", p, spec=spec)
    ref, _ = col.shell_integral(lambda q: col.kernel_kc1(ctx, p, q), p, col._kernel_radius(ctx, p), spec)
    assert base == pytest.approx(ref, rel=1e-12)
    assert col.weighted_kernel_integral(ctx, "kc2", p, ell=1.0, spec=spec) > 0
    with pytest.raises(UsageError):
        col.weighted_kernel_integral(ctx, "kc1", p, ell=-1.0, spec=spec)


def test_shell_integral_gaussian():
    val, err = col.shell_integral(lambda q: np.exp(-(q * q).sum(1) / 2), np.zeros(3), 12.0,
                                  col.QuadratureSpec(12, 8, 16, rtol=1e-10))
    assert val == pytest.approx((2 * np.pi) ** 1.5, rel=1e-10)


def test_context_normalization():
    ctx = col.KernelContext.from_values(2.0, (0, 0, 0), 1.5, 3.0)
    from relkin import specfun
    g = 9.0 / 1.5
    assert ctx.c0 == pytest.approx(2.0 * g / (4 * np.pi * 27.0 * float(specfun.bessel_k(2, g))), rel=1e-13)
    assert col.cbar1(2.0) == 0.125
