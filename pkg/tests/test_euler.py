import csv
import json
import math

import numpy as np
import pytest

from relkin import euler
from relkin.equilibria import cls_entropy, sound_speed_rel, state_from_PS
from relkin.errors import BlowUpError, UsageError

S1 = float(cls_entropy(1.0, 1.0))


def _const(M=16, c=None, u=0.1):
    V = np.zeros((5, M))
    V[0] = 1.0
    V[1] = u
    V[4] = S1
    return euler.GridField(V, 0.0, c)


@pytest.mark.parametrize("c", [None, 10.0])
def test_constant_state_is_stationary(c):
    f = _const(c=c)
    g = euler.evolve(f, 0.05, 0.01)
    assert np.array_equal(g.V, f.V)
    assert g.t == pytest.approx(0.05)


def test_field_validation():
    with pytest.raises(UsageError):
        euler.GridField(np.zeros((4, 8)))
    V = _const().V.copy()
    V[0, 3] = -1.0
    with pytest.raises(BlowUpError):
        euler.GridField(V)


def test_step_errors():
    f = _const()
    with pytest.raises(UsageError):
        euler.step_rel_euler(f, 1e-3)
    with pytest.raises(UsageError):
        euler.step_cls_euler(_const(c=10.0), 1e-3)
    with pytest.raises(UsageError):
        euler.step_cls_euler(f, 1.0)
    with pytest.raises(UsageError):
        euler.step_cls_euler(f, -1.0)


def test_wave_speeds():
    f = _const(c=None, u=0.0)
    assert euler.max_wave_speed(f) == pytest.approx(math.sqrt(5 / 3), rel=1e-12)
    r = _const(c=3.0, u=0.0)
    a = sound_speed_rel(state_from_PS(1.0, S1, 3.0))
    assert euler.max_wave_speed(r) == pytest.approx(a, rel=1e-10)
    # causality for a moving fluid
    assert euler.max_wave_speed(_const(c=3.0, u=5.0)) < 3.0


def test_acoustic_pulse_speed():
    M, w = 512, 0.03
    x = np.arange(M) / M
    V = np.zeros((5, M))
    V[0] = 1.0 + 1e-4 * np.exp(-((x - 0.3) ** 2) / (2 * w * w))
    V[4] = S1
    f = euler.GridField(V)
    t_end = 0.3
    g = euler.evolve(f, t_end, 0.4 / M / math.sqrt(5 / 3))
    dp = g.V[0] - 1.0
    k = int(np.argmax(np.where(x > 0.3, dp, -np.inf)))
    a, b, c = dp[k - 1], dp[k], dp[k + 1]
    peak = x[k] + 0.5 * (a - c) / (a - 2 * b + c) / M
    speed = (peak - 0.3) / t_end
    assert speed == pytest.approx(math.sqrt(5 / 3), rel=1e-2)


@pytest.mark.parametrize("c", [None, 5.0])
def test_self_convergence_order(c):
    def run(M):
        f = euler.initial_field(M, amplitude=0.05, c=c)
        return euler.evolve(f, 0.05, 0.05 / 16).V

    coarse, mid, fine = run(32), run(64), run(128)
    e1 = np.abs(coarse - fine[:, ::4]).max()
    e2 = np.abs(mid - fine[:, ::2]).max()
    assert e1 / e2 >= 8.0


def test_identical_systems_zero_gap():
    f = euler.initial_field(32)
    a = euler.evolve(f, 0.05, 0.005)
    b = euler.evolve(f, 0.05, 0.005)
    assert np.array_equal(a.V, b.V)


def test_coefficients_match_pointwise_assembly():
    from relkin.expansion import assemble_rel_euler_matrices
    V = np.zeros((5, 5))
    V[0] = np.linspace(0.8, 1.2, 5)
    V[1:4] = 0.2
    V[4] = S1
    B0, B1 = euler.rel_coefficients(V, 7.0)
    for k in range(5):
        ref = assemble_rel_euler_matrices(state_from_PS(V[0, k], V[4, k], 7.0, V[1:4, k]))
        assert np.allclose(B0[k], ref[0], rtol=1e-10)
        assert np.allclose(B1[k], ref[1], rtol=1e-10)


def test_fluid_derivatives_consistent():
    f = euler.initial_field(64, c=10.0)
    st_, dt, dx = euler.fluid_derivatives(f, 3)
    h = 1e-6
    Vt, Vx = euler.time_derivative(f)
    s2 = state_from_PS(f.V[0, 3] + h * Vx[0, 3], f.V[4, 3] + h * Vx[4, 3], 10.0)
    assert (s2.n0 - st_.n0) / h == pytest.approx(dx[0], rel=1e-4)
    with pytest.raises(UsageError):
        euler.fluid_derivatives(euler.initial_field(16), 0)


def test_small_limit_sweep_and_outputs(tmp_path):
    rep = euler.newtonian_limit_experiment((10.0, 20.0), M=32, t_end=0.1)
    assert rep.gaps[0] / rep.gaps[1] == pytest.approx(4.0, rel=0.2)
    # velocity also converges at the same rate
    assert rep.component_gaps[0, 1] / rep.component_gaps[1, 1] == pytest.approx(4.0, rel=0.2)
    rep.to_json(tmp_path / "r.json")
    assert json.loads((tmp_path / "r.json").read_text())["slope"] == pytest.approx(rep.slope)
    euler.write_timeseries_csv(tmp_path / "t.csv", rep)
    rows = list(csv.reader(open(tmp_path / "t.csv")))
    assert rows[0] == ["c", "t", "gap"] and len(rows) == 1 + 2 * rep.times.size


def test_gap_series_shrinks_with_c():
    rep10 = euler.newtonian_limit_experiment((10.0, 40.0), M=64, t_end=0.3)
    assert rep10.series[1].max() < rep10.series[0].max() / 10
