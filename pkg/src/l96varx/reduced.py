"""Reduced x-only L96 model driven by a stochastic parameterization.

Each step first draws the parameterization output ``b[n]`` from the current
state ``x[n]`` (and its own history), then advances ``x`` with the two-stage
Runge-Kutta update, ``b[n]`` held fixed in both stages.

Random numbers come from one ``numpy.random.Generator`` (PCG64, seeded with
``default_rng(seed)``).  Every step that needs noise consumes exactly K
standard normals, ordered by gridpoint; the zero parameterization consumes
none.  Noise is drawn in blocks, which yields the same stream as drawing one
vector per step.
"""
from __future__ import annotations

import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .config import ModelConfig
from .errors import ConfigError, DataError, DivergenceError
from .estimation import StabilityWarning
from .l96 import DIVERGENCE_THRESHOLD, SampleSeries
from .narmax import NarmaxModel, narmax_step
from .varx import LagBuffer, VarxModel, varx_step

__all__ = [
    "ZeroParameterization",
    "ReducedTrajectory",
    "advection",
    "rk2_step_reduced",
    "history_length",
    "simulate_reduced",
    "simulate_ensemble",
    "load_parameterization",
    "RNG_ALGORITHM",
]

RNG_ALGORITHM = "numpy.random.PCG64 via numpy.random.default_rng(seed)"
_NOISE_BLOCK = 4096


@dataclass(frozen=True)
class ZeroParameterization:
    """``b = 0``: the unresolved deterministic reference."""

    K: int

    def to_dict(self) -> dict:
        return {"kind": "zero", "label": "unresolved (b=0)", "K": self.K}


def load_parameterization(data: dict):
    """Rebuild a parameterization from its JSON dictionary."""
    kind = data.get("kind")
    loaders = {"varx": VarxModel.from_dict, "narmax": NarmaxModel.from_dict,
               "zero": lambda d: ZeroParameterization(int(d["K"]))}
    if kind not in loaders:
        raise ConfigError(f"unknown parameterization kind {kind!r}")
    try:
        return loaders[kind](data)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed {kind} model: {exc!r}") from None


@dataclass
class ReducedTrajectory:
    """Reduced-model output: row n holds ``x[n]`` and the ``b[n]`` used to
    step from it."""

    Xtilde: np.ndarray
    Btilde: np.ndarray
    seed: int
    model_id: str
    meta: dict = field(default_factory=dict)

    def as_series(self, sample_interval: float) -> SampleSeries:
        return SampleSeries(self.Xtilde, self.Btilde, sample_interval, self.model_id,
                            dict(self.meta))


@lru_cache(maxsize=None)
def _stencil(K: int):
    k = np.arange(K)
    return (k - 1) % K, (k + 1) % K, (k - 2) % K


def advection(x: np.ndarray) -> np.ndarray:
    """``x_{k-1} (x_{k+1} - x_{k-2})`` with periodic indices."""
    km1, kp1, km2 = _stencil(x.shape[-1])
    return x[..., km1] * (x[..., kp1] - x[..., km2])


def rk2_step_reduced(x, b, config: ModelConfig) -> np.ndarray:
    """One two-stage update of the reduced model with ``b`` frozen::

        x' = x + dt/2 (adv(x) - x + F + b)
        x_next = x + dt (adv(x') - x' + F + b)
    """
    x = np.asarray(x, dtype=float)
    dt = config.dt_reduced
    forcing = config.F + np.asarray(b, dtype=float)
    xm = x + (0.5 * dt) * (advection(x) - x + forcing)
    out = x + dt * (advection(xm) - xm + forcing)
    if not np.all(np.abs(out) <= DIVERGENCE_THRESHOLD):
        raise DivergenceError("reduced model produced a non-finite or runaway state", 1)
    return out


def history_length(param) -> int:
    """Number of rows before the current one needed to warm-start ``param``."""
    if isinstance(param, VarxModel):
        return param.p
    if isinstance(param, NarmaxModel):
        return 1
    return 0


def _param_K(param) -> int | None:
    if isinstance(param, (VarxModel, ZeroParameterization)):
        return param.K
    return None


def _stable(param) -> bool:
    info = getattr(param, "info", None) or {}
    return bool(info.get("stability", {}).get("stable", True))


def _model_id(param) -> str:
    label = param.to_dict().get("label", type(param).__name__)
    prov = getattr(param, "provenance", "")
    return f"{label}|{prov}" if prov else label


def _warm_start(param, init, K: int, zero_history: bool):
    h = history_length(param)
    if init is None:
        if not zero_history:
            raise DataError("a warm-start block is required (or pass zero_history=True)")
        return np.zeros((h + 1, K)), np.zeros((h + 1, K))
    if isinstance(init, SampleSeries):
        X0, B0 = init.X, init.B
    else:
        X0, B0 = (np.asarray(a, dtype=float) for a in init)
    if X0.shape[0] < h + 1 or X0.shape != B0.shape:
        raise DataError(f"warm start needs {h + 1} consecutive (x, b) rows, got {X0.shape[0]}")
    if X0.shape[1] != K:
        raise DataError(f"warm-start rows have K={X0.shape[1]}, config has K={K}")
    return X0[-(h + 1):].copy(), B0[-(h + 1):].copy()


def simulate_reduced(config: ModelConfig, param, init, seed: int, n_steps: int,
                     zero_history: bool = False) -> ReducedTrajectory:
    """Run the reduced model for ``n_steps`` steps.

    Parameters
    ----------
    config : ModelConfig
    param : VarxModel, NarmaxModel or ZeroParameterization
    init : SampleSeries or (X, B) pair, or None
        Reference rows; the last ``history_length(param) + 1`` are used: the
        final row's ``x`` is the initial state and the earlier ``b`` rows
        seed the lag history.
    seed : int
    n_steps : int
    zero_history : bool
        Start from ``x = 0`` with zero history instead of reference data.

    Raises
    ------
    DivergenceError
        With ``step`` the index of the offending step.
    """
    K = config.K
    pK = _param_K(param)
    if pK is not None and pK != K:
        raise ConfigError(f"parameterization has K={pK}, config has K={K}")
    if n_steps < 0:
        raise ConfigError("n_steps must be non-negative")
    if not _stable(param):
        warnings.warn(f"{_model_id(param)} was flagged non-stationary", StabilityWarning)
    X0, B0 = _warm_start(param, init, K, zero_history)
    rng = np.random.default_rng(seed)
    Xt = np.empty((n_steps, K))
    Bt = np.empty((n_steps, K))
    x = X0[-1].copy()
    F = config.F

    if isinstance(param, VarxModel):
        lags = LagBuffer.from_history(B0[:-1]) if param.spec.use_endogenous else None

        def draw(x_now, xi):
            b = varx_step(param, lags, x_now, xi)
            if lags is not None:
                lags.push(b)
            return b
    elif isinstance(param, NarmaxModel):
        state = {"z": B0[-2].copy(), "x_prev": X0[-2].copy(), "xi": np.zeros(K)}
        scale = param.sigma

        def draw(x_now, xi):
            xi = scale * xi
            phi, xi = narmax_step(param, state["z"], (x_now, state["x_prev"]), state["xi"], xi, F)
            b = phi + xi
            state.update(z=b, x_prev=x_now, xi=xi)
            return b
    elif isinstance(param, ZeroParameterization):
        zero = np.zeros(K)

        def draw(x_now, xi):
            return zero
    else:
        raise ConfigError(f"unsupported parameterization {type(param).__name__}")

    needs_noise = not isinstance(param, ZeroParameterization)
    noise = None
    for n in range(n_steps):
        j = n % _NOISE_BLOCK
        if needs_noise and j == 0:
            noise = rng.standard_normal((min(_NOISE_BLOCK, n_steps - n), K))
        b = draw(x, noise[j] if needs_noise else None)
        Xt[n] = x
        Bt[n] = b
        try:
            x = rk2_step_reduced(x, b, config)
        except DivergenceError:
            raise DivergenceError(f"reduced model diverged at step {n + 1}", n + 1,
                                  (n + 1) * config.dt_reduced) from None

    meta = {
        "seed": int(seed),
        "model_id": _model_id(param),
        "n_steps": int(n_steps),
        "stable": _stable(param),
        "rng": RNG_ALGORITHM,
        "noise_order": "per step, K standard normals ordered by gridpoint",
        "warm_start": "zero" if init is None else "reference",
        "config": config.to_dict(),
    }
    return ReducedTrajectory(Xt, Bt, int(seed), _model_id(param), meta)


def _run_one(args):
    return simulate_reduced(*args)


def simulate_ensemble(config: ModelConfig, param, init, seeds, n_steps: int,
                      workers: int | None = None) -> list:
    """Independent trajectories, one per seed, optionally in worker processes.

    ``workers`` defaults to ``$L96_THREADS`` (or 1).  Results are identical
    to running the seeds sequentially.
    """
    seeds = list(seeds)
    if workers is None:
        workers = int(os.environ.get("L96_THREADS", "1") or 1)
    jobs = [(config, param, init, s, n_steps) for s in seeds]
    if workers <= 1 or len(seeds) <= 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(seeds))) as pool:
        return list(pool.map(_run_one, jobs))
