import numpy as np
import pytest

from l96varx.config import preset
from l96varx.errors import ConfigError, DivergenceError
from l96varx.l96 import (FullState, feedback, initial_state, integrate_full, rk2_step_full,
                         simulate_full, tendency_full)

from integrators import full_convergence_order, full_equivariance_error


def small(**kw):
    base = dict(K=6, J=4, n_samples=50, burn_in=1.0)
    base.update(kw)
    return preset("unimodal", **base)


def test_feedback_examples():
    cfg = small(h_x=-1.0)
    y = np.full((4, 6), 2.5)
    assert np.allclose(feedback(FullState(np.zeros(6), y), cfg), -2.5)
    assert np.all(feedback(FullState(np.zeros(6), np.zeros((4, 6))), cfg) == 0)
    # J=2 would be rejected by ModelConfig (J >= 4); hand-evaluate with J=4 and zeros
    cfg = small(h_x=-3.2)
    y = np.zeros((4, 6))
    y[:2, 1] = (1.0, 3.0)
    b = feedback(FullState(np.zeros(6), y), cfg)
    assert b[1] == pytest.approx(-3.2 / 4 * 4.0)
    assert np.all(np.delete(b, 1) == 0)


def test_feedback_dimension_mismatch():
    with pytest.raises(ConfigError):
        feedback(FullState(np.zeros(5), np.zeros((4, 6))), small())


def test_tendency_examples():
    cfg = small(F=10.0)
    dx, dy = tendency_full(FullState(np.zeros(6), np.zeros((4, 6))), cfg)
    assert np.all(dx == 10.0) and np.all(dy == 0.0)
    dx, _ = tendency_full(FullState(np.full(6, 3.0), np.zeros((4, 6))), cfg)
    assert np.allclose(dx, -3.0 + 10.0)
    _, dy = tendency_full(FullState(np.ones(6), np.zeros((4, 6))), cfg)
    assert np.allclose(dy, 2.0)


def test_numba_kernel_matches_reference_tendency(rng):
    cfg = small()
    state = FullState(rng.normal(size=6), rng.normal(size=(4, 6)))
    dt = cfg.dt_full
    dx, dy = tendency_full(state, cfg)
    mid = FullState(state.x + 0.5 * dt * dx, state.y + 0.5 * dt * dy)
    dx2, dy2 = tendency_full(mid, cfg)
    new = rk2_step_full(state, cfg)
    assert np.allclose(new.x, state.x + dt * dx2, atol=1e-14)
    assert np.allclose(new.y, state.y + dt * dy2, atol=1e-14)
    assert new.t == pytest.approx(dt)


def test_rk2_fixed_point():
    cfg = small(F=0.0)
    s = FullState(np.zeros(6), np.zeros((4, 6)))
    new = rk2_step_full(s, cfg)
    assert np.all(new.x == 0) and np.all(new.y == 0)


def test_rk2_scalar_decay_hand_value():
    # uniform x, y = 0, F = 0 and h_y = 0: dx/dt = -x exactly
    cfg = small(F=0.0, h_y=0.0, dt_full=0.1, sample_interval=0.1, dt_reduced=0.1)
    new = rk2_step_full(FullState(np.ones(6), np.zeros((4, 6))), cfg)
    assert np.allclose(new.x, 0.905, atol=1e-15)


def test_translation_equivariance_full():
    assert full_equivariance_error() <= 1e-10


def test_divergence_reports_step():
    cfg = small(F=1e9, h_y=0.0)
    with pytest.raises(DivergenceError) as info:
        integrate_full(FullState(np.zeros(6), np.zeros((4, 6))), cfg, 100, step_offset=7)
    assert info.value.step >= 8


def test_simulate_full_shapes_and_feedback_consistency():
    cfg = small()
    series, state = simulate_full(cfg, seed=3, return_state=True)
    assert series.X.shape == series.B.shape == (50, 6)
    # the last recorded row is the final state and its feedback
    assert np.array_equal(series.X[-1], state.x)
    assert np.allclose(series.B[-1], feedback(state, cfg), atol=1e-14)
    assert series.config_id == cfg.config_hash()
    assert series.meta["seed"] == 3


def test_sampling_is_every_tenth_step():
    cfg = small(n_samples=3)
    series, state = simulate_full(cfg, seed=1, return_state=True)
    # restart from the second sample: 10 full steps reach the third
    s1 = simulate_full(small(n_samples=2), seed=1, return_state=True)[1]
    s2 = integrate_full(s1, cfg, cfg.steps_per_sample)
    assert np.allclose(s2.x, series.X[2], atol=1e-13)


def test_simulate_full_zero_samples():
    series = simulate_full(small(n_samples=0), seed=1)
    assert series.X.shape == (0, 6)


def test_simulate_full_deterministic():
    a = simulate_full(small(), seed=11)
    b = simulate_full(small(), seed=11)
    c = simulate_full(small(), seed=12)
    assert np.array_equal(a.X, b.X) and np.array_equal(a.B, b.B)
    assert not np.array_equal(a.X, c.X)


def test_initial_state_convention():
    cfg = preset("trimodal")
    s = initial_state(cfg, np.random.default_rng(0))
    assert np.all(np.abs(s.x) <= cfg.F / 10) and np.all(s.y == 0)


def test_full_rk2_order():
    assert abs(full_convergence_order() - 2.0) <= 0.2
