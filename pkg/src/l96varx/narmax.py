"""Two fixed NARMAX parameterizations, applied independently at each gridpoint.

Both produce ``z[n] = Phi[n] + xi[n]`` with ``xi ~ N(0, sigma2)``:

* ``N1201``: ``Phi = mu + a1 z[n-1] + b11 x_cur + b21 x_prev + d1 xi[n-1]``
* ``N1110``: ``Phi = mu + a1 z[n-1] + b11 x_cur + b12 x_cur**2 + b13 x_cur**3
  + c11 R(x_cur)``

Here ``x_cur`` is the most recent resolved state (the one the reduced model
is about to step from), ``x_prev`` the state before it, ``z[n-1]`` the
previous parameterization output at the same gridpoint, and
``R(x)_k = x_{k-1} (x_{k+1} - x_{k-2}) - x_k + F`` the resolved L96
tendency.  Shipped presets (``preset_model``) hold the published parameters
for the trimodal configuration at sample interval 0.01.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.signal import lfilter

from .errors import ConfigError, DataError, EstimationError, StateError
from .estimation import ols_fit, series_digest
from .l96 import SampleSeries

__all__ = [
    "VARIANTS",
    "NarmaxModel",
    "resolved_tendency",
    "narmax_step",
    "fit_narmax",
    "preset_model",
]

VARIANTS = ("N1201", "N1110")
_N_EXOG = {"N1201": 2, "N1110": 3}


def _variant(name) -> str:
    name = str(name).upper()
    if not name.startswith("N"):
        name = "N" + name
    if name not in VARIANTS:
        raise ConfigError(f"unknown NARMAX variant {name!r}; choose from {VARIANTS}")
    return name


@dataclass(frozen=True, eq=False)
class NarmaxModel:
    variant: str
    mu: float
    sigma2: float
    a1: float
    b: tuple
    c11: float | None = None
    d1: float | None = None
    provenance: str = ""
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        variant = _variant(self.variant)
        object.__setattr__(self, "variant", variant)
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        if len(self.b) != _N_EXOG[variant]:
            raise ConfigError(f"{variant} needs {_N_EXOG[variant]} exogenous coefficients")
        if not self.sigma2 >= 0:
            raise ConfigError("sigma2 must be non-negative")
        if variant == "N1201":
            if self.d1 is None or self.c11 is not None:
                raise ConfigError("N1201 has d1 and no c11")
        elif self.c11 is None or self.d1 is not None:
            raise ConfigError("N1110 has c11 and no d1")
        values = [self.mu, self.sigma2, self.a1, *self.b, self.c11 or 0.0, self.d1 or 0.0]
        if not np.all(np.isfinite(values)):
            raise ConfigError("NARMAX parameters must be finite")

    @property
    def sigma(self) -> float:
        return float(np.sqrt(self.sigma2))

    def to_dict(self) -> dict:
        out = {"kind": "narmax", "variant": self.variant, "label": f"NARMAX {self.variant}",
               "mu": self.mu, "sigma2": self.sigma2, "a1": self.a1, "b": list(self.b),
               "provenance": self.provenance}
        if self.c11 is not None:
            out["c11"] = self.c11
        if self.d1 is not None:
            out["d1"] = self.d1
        if self.info:
            out["info"] = self.info
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "NarmaxModel":
        return cls(data["variant"], data["mu"], data["sigma2"], data["a1"], tuple(data["b"]),
                   data.get("c11"), data.get("d1"), data.get("provenance", ""),
                   data.get("info", {}))


def preset_model(variant) -> NarmaxModel:
    """Published trimodal parameters, loaded from the packaged data file."""
    variant = _variant(variant)
    text = resources.files("l96varx").joinpath("data/narmax_table2.json").read_text()
    params = json.loads(text)[variant]
    return NarmaxModel(variant, provenance="preset:table2",
                       info={"stability": _stability(params["a1"])}, **params)


def resolved_tendency(x, F: float) -> np.ndarray:
    """Resolved L96 tendency along the last axis."""
    x = np.asarray(x, dtype=float)
    return np.roll(x, 1, -1) * (np.roll(x, -1, -1) - np.roll(x, 2, -1)) - x + F


def narmax_step(model: NarmaxModel, z_prev, x_hist, xi_prev, xi_now, F: float):
    """Evaluate ``Phi`` for every gridpoint.

    Parameters
    ----------
    z_prev : array (K,)
        Previous output ``z[n-1]``.
    x_hist : pair of arrays (K,)
        ``(x_cur, x_prev)``: the most recent resolved state and the one
        before.  ``x_prev`` may be ``None`` for ``N1110``.
    xi_prev, xi_now : array (K,)
        Previous and current innovations, already scaled to variance
        ``sigma2`` by the caller.
    F : float
        Forcing, needed by the resolved-tendency feature.

    Returns
    -------
    phi, xi_now
        The parameterization output is ``phi + xi_now``.
    """
    if z_prev is None or x_hist is None or x_hist[0] is None:
        raise StateError("NARMAX step needs z[n-1] and the current resolved state")
    x_cur = np.asarray(x_hist[0], dtype=float)
    phi = model.mu + model.a1 * np.asarray(z_prev, dtype=float) + model.b[0] * x_cur
    if model.variant == "N1201":
        if len(x_hist) < 2 or x_hist[1] is None or xi_prev is None:
            raise StateError("N1201 needs the previous resolved state and innovation")
        phi = phi + model.b[1] * np.asarray(x_hist[1], dtype=float) + model.d1 * np.asarray(xi_prev)
    else:
        phi = (phi + model.b[1] * x_cur ** 2 + model.b[2] * x_cur ** 3
               + model.c11 * resolved_tendency(x_cur, F))
    return phi, xi_now


def _stability(a1: float) -> dict:
    return {"moduli": [abs(float(a1))], "stable": bool(abs(a1) < 1),
            "spectral_radius": abs(float(a1))}


def _design(series: SampleSeries, variant: str, F: float | None):
    """Pooled design without the moving-average column; rows n = 1..N-1."""
    X, B = series.X, series.B
    x_cur = X[1:]
    cols = [np.ones(x_cur.size), B[:-1].ravel(), x_cur.ravel()]
    if variant == "N1201":
        cols.append(X[:-1].ravel())
        names = ["mu", "a1", "b11", "b21"]
    else:
        if F is None:
            raise ConfigError("N1110 fitting needs the forcing F")
        cols += [x_cur.ravel() ** 2, x_cur.ravel() ** 3,
                 resolved_tendency(x_cur, F).ravel()]
        names = ["mu", "a1", "b11", "b12", "b13", "c11"]
    return np.column_stack(cols), B[1:].ravel(), names


def _profile(Z, target, K: int, d1: float):
    """OLS of the filtered problem for a fixed MA coefficient.

    With ``xi[n] = e[n] - d1 xi[n-1]`` and ``xi`` zero before the first row,
    the innovations are ``e`` passed through ``1 / (1 + d1 L)`` separately at
    each gridpoint; filtering target and design the same way makes the
    remaining coefficients an ordinary least-squares problem.
    """
    def filt(v):
        v = v.reshape(-1, K, *v.shape[1:])
        return lfilter([1.0], [1.0, d1], v, axis=0).reshape(-1, *v.shape[2:])

    Zf = filt(Z)
    yf = filt(target)
    coef = ols_fit(Zf, yf)
    xi = yf - Zf @ coef
    return coef, xi


def fit_narmax(series: SampleSeries, variant, F: float | None = None,
               moving_average: bool = True, tol: float = 1e-8,
               max_iter: int = 500) -> NarmaxModel:
    """Conditional least-squares fit, coefficients pooled over gridpoints.

    ``N1110`` is a single OLS.  ``N1201`` minimises the sum of squared
    innovations over all coefficients including the moving-average term:
    for each trial ``d1`` in the invertible range ``(-1, 1)`` the other
    coefficients follow from OLS on the filtered problem, and ``d1`` itself
    is found by bounded scalar minimisation (tolerance ``tol``, at most
    ``max_iter`` evaluations).  With ``moving_average=False`` the MA term is
    fixed at ``d1 = 0``.
    """
    variant = _variant(variant)
    if series.N < 20:
        raise DataError("too few samples for a NARMAX fit")
    if not np.std(series.B) > 0:
        raise EstimationError("feedback series has zero variance")
    Z, target, names = _design(series, variant, F)
    K = series.K
    coef = ols_fit(Z, target, names=names)
    resid = target - Z @ coef
    d1 = 0.0
    evaluations = 1
    if variant == "N1201" and moving_average:
        bound = 1.0 - 1e-9
        res = minimize_scalar(lambda d: float(np.sum(_profile(Z, target, K, d)[1] ** 2)),
                              bounds=(-bound, bound), method="bounded",
                              options={"xatol": tol, "maxiter": max_iter})
        if not res.success or not np.isfinite(res.fun):
            raise EstimationError(f"N1201 fit did not converge: {res.message}",
                                  last_iterate=np.append(coef, res.x))
        d1 = float(res.x)
        coef, resid = _profile(Z, target, K, d1)
        evaluations = int(res.nfev)
    values = dict(zip(names, coef))
    sigma2 = float(np.var(resid, ddof=1))
    info = {"evaluations": evaluations, "stability": _stability(values["a1"]),
            "residual_std": float(np.sqrt(sigma2))}
    common = dict(mu=float(values["mu"]), sigma2=sigma2, a1=float(values["a1"]),
                  provenance=series_digest(series), info=info)
    if variant == "N1201":
        return NarmaxModel("N1201", b=(values["b11"], values["b21"]), d1=d1, **common)
    return NarmaxModel("N1110", b=(values["b11"], values["b12"], values["b13"]),
                       c11=float(values["c11"]), **common)
