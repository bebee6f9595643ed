import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dampwave.damping_models import strip_profile
from dampwave.rate_calculus import GrowthExpr
from dampwave.wave_sim import (
    WaveState, WaveSystem, damped_oscillator, data_norm, energy,
    energy_identity_residual, evolve, expm_oracle, fit_decay_rate,
    quasimode_persistence, random_smooth, single_frequency, step)

S = GrowthExpr.small
STRIP2 = strip_profile(1.0, S(pow=2))


def _rel(a, b):
    return np.linalg.norm(np.r_[a[0] - b[0], a[1] - b[1]]) / np.linalg.norm(np.r_[b[0], b[1]])


@pytest.mark.parametrize("c", [0.0, 0.7, 2.0, 3.0])
def test_constant_damping_closed_form(c):
    system = WaveSystem(c, 64)
    x = system.x
    state = single_frequency(64, k=1, n=0)
    err = 0.0
    for k in range(1, 10001):
        state = step(system, state, 1e-3)
        if k % 250 == 0:
            want = damped_oscillator(1.0, c, k * 1e-3) * np.cos(x)
            err = max(err, np.max(np.abs(state.modes[0][0] - want)))
    assert err <= 1e-6


def test_undamped_energy_drift():
    traj = evolve(WaveSystem(0.0, 64), random_smooth(64, [0, 3]), 1e-3, 10000)
    assert np.max(np.abs(traj.E / traj.E[0] - 1)) <= 1e-12
    assert np.max(traj.residual) <= 1e-12


def test_matches_matrix_exponential():
    system = WaveSystem(STRIP2, 64)
    state = random_smooth(64, [0], seed=1, width=1.0)
    traj = evolve(system, state, 1e-3, 1000)
    assert _rel(traj.state.modes[0], expm_oracle(system, 0, *state.modes[0], 1.0)) <= 1e-6


def test_second_order_in_time():
    system = WaveSystem(STRIP2, 64)
    state = random_smooth(64, [3], seed=2)
    exact = expm_oracle(system, 3, *state.modes[3], 1.0)
    errs = [_rel(evolve(system, state, dt, round(1 / dt)).state.modes[3], exact) for dt in (2e-3, 1e-3)]
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=1e-2)


def test_energy_identity_and_monotone():
    system = WaveSystem(STRIP2, 64)
    traj = evolve(system, random_smooth(64, [0, 2, 5], seed=3), 1e-3, 2000)
    assert traj.monotone
    assert np.max(traj.residual) <= 1e-8
    # strictly decreasing wherever dissipation is visible
    assert np.all(np.diff(traj.E) < 0)


def test_trapezoid_identity_is_third_order():
    system = WaveSystem(STRIP2, 64)
    state = random_smooth(64, [3], seed=1)
    worst = [evolve(system, state, dt, round(0.2 / dt)).trapezoid_residual.max() for dt in (2e-3, 1e-3)]
    assert worst[0] / worst[1] == pytest.approx(8.0, rel=0.05)


def test_single_step_identity_function():
    system = WaveSystem(STRIP2, 32)
    a = random_smooth(32, [1], seed=4)
    b = step(system, a, 1e-3)
    assert energy_identity_residual(system, a, b, 1e-3) <= 1e-13
    assert energy_identity_residual(system, a, b, 1e-3, "trapezoid") > 0
    assert energy(system, b) < energy(system, a)
    with pytest.raises(ValueError):
        energy_identity_residual(system, a, b, 1e-3, "simpson")


@given(st.integers(0, 2 ** 16), st.integers(1, 4))
@settings(max_examples=10, deadline=None)
def test_modes_decouple(seed, steps):
    system = WaveSystem(STRIP2, 32)
    joint = random_smooth(32, [0, 2, 7], seed=seed)
    together = evolve(system, joint, 1e-2, steps, workers=2).state
    for n, pair in joint.modes.items():
        alone = evolve(system, WaveState({n: pair}), 1e-2, steps).state
        for a, b in zip(alone.modes[n], together.modes[n]):
            assert np.array_equal(a, b)


def test_accuracy_bound_enforced():
    system = WaveSystem(0.0, 64)
    with pytest.raises(ValueError):
        step(system, single_frequency(64, 1, 0), 0.05)
    with pytest.raises(ValueError):
        WaveSystem(-1.0, 64)


def test_data_norm_single_frequency():
    # u = cos(x): ||u||_{H^2}^2 = (1 + 1)^2 * ||cos||^2 = 4 * 2 pi^2
    assert data_norm(single_frequency(64, 1, 0)) == pytest.approx(2 * math.sqrt(2) * math.pi, rel=1e-12)


@pytest.mark.parametrize("n", [32, 64, 128])
def test_quasimode_persistence(n):
    rep = quasimode_persistence(S(pow=2), n)
    assert rep.passed and rep.energy_ratio >= 0.5
    assert rep.energy_ratio >= rep.duhamel_bound


def test_persistence_undamped_limit():
    rep = quasimode_persistence(S(pow=2), 64, W=0.0, horizon_factor=0.4)
    assert rep.energy_ratio == pytest.approx(1.0, abs=1e-10)


def test_gcc_exponential_decay():
    system = WaveSystem(1.0, 64)
    traj = evolve(system, random_smooth(64, [0, 1, 2]), 1e-2, 1000)
    c = fit_decay_rate(traj.t, traj.E)
    assert c > 0.5
    assert np.all(traj.E / traj.E[0] <= np.exp(-c * traj.t) * 3)


def test_csv_rows():
    traj = evolve(WaveSystem(STRIP2, 32), single_frequency(32, 1, 1), 1e-2, 10)
    rows = traj.rows(every=5)
    assert [r["t"] for r in rows] == pytest.approx([0.0, 0.05, 0.1])
    assert list(rows[0]) == ["t", "E", "E_identity_residual"]
