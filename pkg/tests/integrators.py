"""Self-convergence and translation checks shared by unit and acceptance tests."""
import numpy as np

from l96varx.config import preset
from l96varx.l96 import FullState, initial_state, integrate_full
from l96varx.reduced import rk2_step_reduced


def roll_state(state, s):
    return FullState(np.roll(state.x, s), np.roll(state.y, s, axis=1), state.t)


def _run_full(cfg, state, T):
    return integrate_full(state, cfg, int(round(T / cfg.dt_full)))


def full_convergence_order(seed=5):
    """Observed order of the full stepper over one time unit (dt 2e-3 and 1e-3
    against a 1e-5 reference)."""
    base = preset("unimodal")
    s0 = integrate_full(initial_state(base, np.random.default_rng(seed)), base, 2000)
    s0 = FullState(s0.x, s0.y + 0.1 * np.random.default_rng(seed).normal(size=s0.y.shape), 0.0)
    ref = _run_full(preset("unimodal", dt_full=1e-5), s0, 1.0)
    errs = []
    for dt in (2e-3, 1e-3):
        out = _run_full(preset("unimodal", dt_full=dt), s0, 1.0)
        errs.append(max(np.max(np.abs(out.x - ref.x)), np.max(np.abs(out.y - ref.y))))
    return float(np.log2(errs[0] / errs[1]))


def _run_reduced(x, b, h, T):
    cfg = preset("unimodal", dt_reduced=h, sample_interval=h, dt_full=1e-5)
    for _ in range(int(round(T / h))):
        x = rk2_step_reduced(x, b, cfg)
    return x


def reduced_convergence_order(seed=5):
    """Observed order of the reduced stepper with a fixed forcing field ``b``."""
    rng = np.random.default_rng(seed)
    x0 = _run_reduced(rng.uniform(-1, 1, 18), np.zeros(18), 0.01, 5.0)
    b = rng.normal(size=18)
    ref = _run_reduced(x0, b, 1e-5, 1.0)
    errs = [np.max(np.abs(_run_reduced(x0, b, h, 1.0) - ref)) for h in (2e-3, 1e-3)]
    return float(np.log2(errs[0] / errs[1]))


def full_equivariance_error(seed=0, n_steps=200):
    rng = np.random.default_rng(seed)
    cfg = preset("unimodal")
    s0 = FullState(rng.normal(size=18) * 3, rng.normal(size=(20, 18)) * 0.5)
    a = integrate_full(roll_state(s0, 1), cfg, n_steps)
    b = roll_state(integrate_full(s0, cfg, n_steps), 1)
    return float(max(np.max(np.abs(a.x - b.x)), np.max(np.abs(a.y - b.y))))


def reduced_equivariance_error(seed=0, n_steps=100):
    rng = np.random.default_rng(seed)
    cfg = preset("trimodal")
    x = rng.normal(size=32) * 3
    b = rng.normal(size=32)
    xr = np.roll(x, 1)
    for _ in range(n_steps):
        x = rk2_step_reduced(x, b, cfg)
        xr = rk2_step_reduced(xr, np.roll(b, 1), cfg)
    return float(np.max(np.abs(xr - np.roll(x, 1))))
