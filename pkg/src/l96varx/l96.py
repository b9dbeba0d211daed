"""Full two-layer Lorenz '96 model: tendencies, RK2 stepping, sampled runs.

State layout
------------
``FullState.y`` is a ``(J, K)`` matrix with ``y[j, k]`` the j-th small-scale
variable attached to ``x[k]``.  The small-scale variables form one ring of
length ``J*K`` because ``y[J, k] == y[0, k+1]``; the integrator works on that
ring, ``y_ring = y.T.ravel()`` (k-major), so all periodic wrapping reduces to
modular indexing on a flat vector.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .config import ModelConfig
from .errors import ConfigError, DivergenceError

__all__ = [
    "FullState",
    "SampleSeries",
    "feedback",
    "tendency_full",
    "rk2_step_full",
    "integrate_full",
    "initial_state",
    "simulate_full",
    "DIVERGENCE_THRESHOLD",
]

DIVERGENCE_THRESHOLD = 1e6


@dataclass
class FullState:
    """Instantaneous state of the full model."""

    x: np.ndarray
    y: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.x.ndim != 1 or self.y.ndim != 2 or self.y.shape[1] != self.x.shape[0]:
            raise ConfigError(
                f"inconsistent state shapes x{self.x.shape}, y{self.y.shape}; expected y (J, K)"
            )

    @property
    def K(self) -> int:
        return self.x.shape[0]

    @property
    def J(self) -> int:
        return self.y.shape[0]

    def copy(self) -> "FullState":
        return FullState(self.x.copy(), self.y.copy(), self.t)


@dataclass
class SampleSeries:
    """Sampled training record ``(X, B)`` of a full-model run.

    Row ``n`` of ``B`` is the feedback computed from the same instant as row
    ``n`` of ``X``.
    """

    X: np.ndarray
    B: np.ndarray
    sample_interval: float
    config_id: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=float)
        self.B = np.ascontiguousarray(self.B, dtype=float)
        if self.X.ndim != 2 or self.X.shape != self.B.shape:
            raise ConfigError(f"X{self.X.shape} and B{self.B.shape} must be equal 2-D shapes")

    @property
    def N(self) -> int:
        return self.X.shape[0]

    @property
    def K(self) -> int:
        return self.X.shape[1]

    def head(self, n: int) -> "SampleSeries":
        return SampleSeries(self.X[:n], self.B[:n], self.sample_interval, self.config_id,
                            dict(self.meta))


def _check_dims(state: FullState, config: ModelConfig):
    if state.K != config.K or state.J != config.J:
        raise ConfigError(
            f"state has K={state.K}, J={state.J} but config expects K={config.K}, J={config.J}"
        )


def feedback(state: FullState, config: ModelConfig) -> np.ndarray:
    """Small-scale feedback ``b_k = (h_x / J) * sum_j y[j, k]``."""
    _check_dims(state, config)
    return (config.h_x / config.J) * state.y.sum(axis=0)


def tendency_full(state: FullState, config: ModelConfig):
    """Right-hand side of the coupled system, written with ``np.roll``.

    Returns
    -------
    dx : ndarray, shape (K,)
    dy : ndarray, shape (J, K)
    """
    _check_dims(state, config)
    x = state.x
    ring = state.y.T.ravel()
    b = feedback(state, config)
    dx = np.roll(x, 1) * (np.roll(x, -1) - np.roll(x, 2)) - x + config.F + b
    forcing = config.h_y * np.repeat(x, config.J)
    dring = (np.roll(ring, -1) * (np.roll(ring, 1) - np.roll(ring, -2)) - ring + forcing)
    dring /= config.epsilon
    return dx, dring.reshape(config.K, config.J).T.copy()


@njit(cache=True)
def _tendency(x, y, K, J, F, hx, hy, inv_eps, dx, dy):
    n = K * J
    c = hx / J
    for k in range(K):
        s = 0.0
        for j in range(J):
            s += y[k * J + j]
        dx[k] = x[k - 1] * (x[(k + 1) % K] - x[k - 2]) - x[k] + F + c * s
    for i in range(n):
        dy[i] = inv_eps * (y[(i + 1) % n] * (y[i - 1] - y[(i + 2) % n]) - y[i] + hy * x[i // J])


@njit(cache=True)
def _bad(x, y, limit):
    for v in x:
        if not (abs(v) <= limit):
            return True
    for v in y:
        if not (abs(v) <= limit):
            return True
    return False


@njit(cache=True)
def _advance(x, y, n_steps, dt, K, J, F, hx, hy, inv_eps, limit):
    """Midpoint RK2 for ``n_steps`` steps, in place.  Returns the 1-based index
    of the first step producing a bad value, or 0."""
    k1x = np.empty_like(x)
    k1y = np.empty_like(y)
    xm = np.empty_like(x)
    ym = np.empty_like(y)
    half = 0.5 * dt
    for step in range(n_steps):
        _tendency(x, y, K, J, F, hx, hy, inv_eps, k1x, k1y)
        for i in range(x.shape[0]):
            xm[i] = x[i] + half * k1x[i]
        for i in range(y.shape[0]):
            ym[i] = y[i] + half * k1y[i]
        _tendency(xm, ym, K, J, F, hx, hy, inv_eps, k1x, k1y)
        for i in range(x.shape[0]):
            x[i] += dt * k1x[i]
        for i in range(y.shape[0]):
            y[i] += dt * k1y[i]
        if _bad(x, y, limit):
            return step + 1
    return 0


@njit(cache=True)
def _record(x, y, n_samples, steps_per_sample, dt, K, J, F, hx, hy, inv_eps, limit, X, B):
    """Record ``n_samples`` rows of (x, b), stepping between rows.  Returns
    (row index, step index) of a divergence, or (-1, 0)."""
    c = hx / J
    for n in range(n_samples):
        for k in range(K):
            X[n, k] = x[k]
            s = 0.0
            for j in range(J):
                s += y[k * J + j]
            B[n, k] = c * s
        if n == n_samples - 1:
            break
        bad = _advance(x, y, steps_per_sample, dt, K, J, F, hx, hy, inv_eps, limit)
        if bad:
            return n, n * steps_per_sample + bad
    return -1, 0


def _kernel_args(config: ModelConfig):
    return (config.K, config.J, float(config.F), float(config.h_x), float(config.h_y),
            1.0 / config.epsilon, DIVERGENCE_THRESHOLD)


def integrate_full(state: FullState, config: ModelConfig, n_steps: int,
                   step_offset: int = 0) -> FullState:
    """Advance ``state`` by ``n_steps`` RK2 steps of size ``config.dt_full``.

    Raises
    ------
    DivergenceError
        If any value becomes non-finite or exceeds ``DIVERGENCE_THRESHOLD``;
        ``step`` is the global step index (``step_offset`` + local index).
    """
    _check_dims(state, config)
    x = state.x.copy()
    ring = np.ascontiguousarray(state.y.T.ravel())
    bad = _advance(x, ring, int(n_steps), float(config.dt_full), *_kernel_args(config))
    if bad:
        step = step_offset + bad
        t = state.t + bad * config.dt_full
        raise DivergenceError(f"full model diverged at step {step} (t={t:.6g})", step, t)
    return FullState(x, ring.reshape(config.K, config.J).T.copy(),
                     state.t + n_steps * config.dt_full)


def rk2_step_full(state: FullState, config: ModelConfig, step_index: int = 0) -> FullState:
    """One midpoint-RK2 step (half-step predictor, full-step corrector) of the
    coupled (x, y) system."""
    return integrate_full(state, config, 1, step_offset=step_index)


def initial_state(config: ModelConfig, rng: np.random.Generator) -> FullState:
    """x_k ~ U[-1, 1] * F/10 independently, y = 0, t = 0."""
    x = rng.uniform(-1.0, 1.0, config.K) * (config.F / 10.0)
    return FullState(x, np.zeros((config.J, config.K)), 0.0)


def simulate_full(config: ModelConfig, seed: int, return_state: bool = False):
    """Integrate through the burn-in, then record ``n_samples`` rows of (x, b)
    every ``sample_interval``.

    Returns
    -------
    SampleSeries, or (SampleSeries, FullState) when ``return_state`` is set;
    the state is the one at the last recorded instant.
    """
    rng = np.random.default_rng(seed)
    state = initial_state(config, rng)
    args = _kernel_args(config)
    dt = float(config.dt_full)
    x = state.x.copy()
    ring = np.zeros(config.K * config.J)
    burn = config.burn_in_steps
    bad = _advance(x, ring, burn, dt, *args)
    if bad:
        raise DivergenceError(f"full model diverged during burn-in at step {bad} "
                              f"(t={bad * dt:.6g})", bad, bad * dt)
    N = config.n_samples
    X = np.empty((N, config.K))
    B = np.empty((N, config.K))
    row, step = _record(x, ring, N, config.steps_per_sample, dt, *args, X, B)
    if row >= 0:
        step += burn
        raise DivergenceError(f"full model diverged at step {step} (t={step * dt:.6g})",
                              step, step * dt)
    series = SampleSeries(X, B, config.sample_interval, config.config_hash(),
                          meta={"seed": int(seed), "config": config.to_dict()})
    if return_state:
        t = config.burn_in + max(N - 1, 0) * config.sample_interval
        return series, FullState(x, ring.reshape(config.K, config.J).T.copy(), t)
    return series
