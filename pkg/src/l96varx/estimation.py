"""Pooled least-squares fitting of VARX parameterizations.

All gridpoints share one coefficient per regressor, so the design matrix
stacks every (time, gridpoint) pair into one row.  The solve is a streaming
QR (tall-skinny QR over row blocks): each block is triangularised together
with the R factor carried over from the previous blocks, so memory stays
bounded by one block while the result equals the in-memory factorisation.
"""
from __future__ import annotations

import hashlib
import warnings

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DataError, EstimationError
from .l96 import SampleSeries
from .timeseries import acf, pacf, pacf_regression
from .varx import DENSE, VarxModel, VarxSpec, check_stability

__all__ = [
    "regressor_names",
    "build_regressor_matrix",
    "iter_regressor_blocks",
    "ols_fit",
    "ols_fit_blocks",
    "residuals",
    "fit_sigma_diag",
    "fit_sigma_dense",
    "fit_parameterization",
    "fit_report",
    "series_digest",
    "pacf",
    "pacf_regression",
    "StabilityWarning",
]

# rows of the pooled design handled per block when streaming
BLOCK_ROWS = 1 << 18
_RANK_TOL = 1e-10


class StabilityWarning(UserWarning):
    """A fitted model violates the VAR stationarity condition."""


def regressor_names(spec: VarxSpec) -> list:
    names = ["const"] if spec.intercept else []
    if spec.use_exogenous:
        names.append("x[n]")
    names += [f"b[n-{i}]" for i in spec.lag_indices]
    return names


def _check_rows(series: SampleSeries, lag: int):
    if series.N <= lag + 10:
        raise DataError(f"need more than {lag + 10} samples to regress with lag {lag}, "
                        f"got {series.N}")


def _block(series: SampleSeries, spec: VarxSpec, start: int, stop: int):
    """Design rows for times ``start <= n < stop`` (time-major, then k)."""
    cols = []
    rows = (stop - start) * series.K
    if spec.intercept:
        cols.append(np.ones(rows))
    if spec.use_exogenous:
        cols.append(series.X[start:stop].ravel())
    for i in spec.lag_indices:
        cols.append(series.B[start - i:stop - i].ravel())
    Z = np.column_stack(cols) if cols else np.empty((rows, 0))
    return Z, series.B[start:stop].ravel()


def build_regressor_matrix(series: SampleSeries, spec: VarxSpec):
    """Pooled design ``Z`` and target for the rows ``n = p .. N-1``.

    Columns are ``[1, x_k^n, b_k^{n-i} for each active lag i]`` restricted to
    the regressors switched on in ``spec``; rows run over time first and
    gridpoint second, giving ``K (N - p)`` rows.
    """
    if spec.K != series.K:
        raise DataError(f"spec has K={spec.K} but series has K={series.K}")
    _check_rows(series, spec.p)
    return _block(series, spec, spec.p, series.N)


def iter_regressor_blocks(series: SampleSeries, spec: VarxSpec, block_rows: int = BLOCK_ROWS):
    if spec.K != series.K:
        raise DataError(f"spec has K={spec.K} but series has K={series.K}")
    _check_rows(series, spec.p)
    step = max(1, block_rows // series.K)
    for start in range(spec.p, series.N, step):
        yield _block(series, spec, start, min(start + step, series.N))


def ols_fit_blocks(blocks, names=None, weights=None) -> np.ndarray:
    """Least squares over an iterable of ``(Z, target)`` row blocks.

    ``weights``, if given, is an iterable of per-row weight vectors aligned
    with the blocks (weighted least squares); ``None`` means uniform weights.
    """
    R = None
    ncol = None
    wit = iter(weights) if weights is not None else None
    for Z, y in blocks:
        Z = np.asarray(Z, dtype=float)
        y = np.asarray(y, dtype=float)
        if wit is not None:
            sw = np.sqrt(np.asarray(next(wit), dtype=float))
            Z = Z * sw[:, None]
            y = y * sw
        ncol = Z.shape[1]
        A = np.column_stack([Z, y])
        if R is not None:
            A = np.vstack([R, A])
        R = np.linalg.qr(A, mode="r")
    if R is None:
        raise DataError("no rows to regress")
    if ncol == 0:
        return np.empty(0)
    if R.shape[0] < ncol:
        raise EstimationError("fewer rows than regressors")
    Rz = R[:ncol, :ncol]
    diag = np.abs(np.diag(Rz))
    scale = np.linalg.norm(Rz, axis=0)
    bad = np.flatnonzero(diag <= _RANK_TOL * np.maximum(scale, np.finfo(float).tiny))
    if bad.size:
        which = names[bad[0]] if names is not None else f"column {bad[0]}"
        raise EstimationError(f"design matrix is rank deficient: {which} is collinear "
                              f"with the preceding columns")
    return solve_triangular(Rz, R[:ncol, ncol])


def ols_fit(Z, target, weights=None, names=None) -> np.ndarray:
    """Least-squares coefficients of ``target ~ Z`` via QR (no normal equations)."""
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2 or Z.shape[0] != np.shape(target)[0]:
        raise DataError(f"Z{Z.shape} and target{np.shape(target)} do not align")
    return ols_fit_blocks([(Z, target)], names=names,
                          weights=None if weights is None else [weights])


def _drift(series: SampleSeries, model: VarxModel, start: int) -> np.ndarray:
    pred = np.full((series.N - start, series.K), model.a0)
    if model.spec.use_exogenous:
        pred += model.d * series.X[start:]
    for i, a in model.lag_coefficients().items():
        pred += a * series.B[start - i:series.N - i]
    return pred


def residuals(series: SampleSeries, model: VarxModel) -> np.ndarray:
    """``b^n`` minus the drift prediction for ``n = p .. N-1``; shape ``(N-p, K)``."""
    if model.K != series.K:
        raise DataError(f"model has K={model.K} but series has K={series.K}")
    if series.N <= model.p:
        raise DataError("series shorter than the model order")
    return series.B[model.p:] - _drift(series, model, model.p)


def fit_sigma_diag(R) -> float:
    """Arithmetic mean over columns of the per-column sample std (ddof=1)."""
    R = np.asarray(R, dtype=float)
    if R.ndim == 1:
        R = R[:, None]
    if R.shape[0] < 2:
        raise DataError("need at least 2 residual rows for a standard deviation")
    return float(np.std(R, axis=0, ddof=1).mean())


def fit_sigma_dense(R) -> np.ndarray:
    """Lower Cholesky factor of the residual sample covariance (ddof=1).

    If the factorisation fails or is numerically singular, the diagonal is
    loaded once with ``1e-12 * trace / K``; a second failure raises
    :class:`EstimationError`.
    """
    R = np.asarray(R, dtype=float)
    if R.ndim != 2 or R.shape[0] < 2:
        raise DataError("need an (n >= 2, K) residual matrix")
    cov = np.atleast_2d(np.cov(R, rowvar=False))
    K = cov.shape[0]
    mean_var = np.trace(cov) / K
    if not mean_var > 0:
        raise EstimationError("residual covariance is zero; use diagonal noise instead")
    floor = 1e-10 * mean_var
    for attempt, load in enumerate((0.0, 1e-12 * mean_var)):
        try:
            L = np.linalg.cholesky(cov + load * np.eye(K))
        except np.linalg.LinAlgError:
            continue
        if np.min(np.diag(L)) ** 2 > floor:
            return L
    raise EstimationError(
        "residual covariance is not positive definite even after diagonal loading "
        "(collinear or duplicated residual columns?); consider diagonal noise"
    )


def series_digest(series: SampleSeries) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(series.X).tobytes())
    h.update(np.ascontiguousarray(series.B).tobytes())
    return h.hexdigest()


def _moments(R: np.ndarray) -> dict:
    flat = R.ravel()
    mu = flat.mean()
    sd = flat.std()
    z = (flat - mu) / sd if sd > 0 else np.zeros_like(flat)
    return {"mean": float(mu), "std": float(sd), "skewness": float(np.mean(z ** 3)),
            "kurtosis": float(np.mean(z ** 4)), "rows": int(R.shape[0])}


def fit_parameterization(series: SampleSeries, spec: VarxSpec, weights=None,
                         block_rows: int = BLOCK_ROWS) -> VarxModel:
    """Fit drift coefficients, the noise root and the stability verdict.

    ``weights`` (optional) is a length ``K (N - p)`` vector in design-row
    order; the default is ordinary least squares.  An unstable fit is
    returned with a :class:`StabilityWarning`, not rejected.
    """
    names = regressor_names(spec)
    blocks = iter_regressor_blocks(series, spec, block_rows)
    wblocks = None
    if weights is not None:
        weights = np.asarray(weights, dtype=float)
        expected = series.K * (series.N - spec.p)
        if weights.shape != (expected,):
            raise DataError(f"weights must have length {expected}")
        step = max(1, block_rows // series.K) * series.K
        wblocks = (weights[i:i + step] for i in range(0, expected, step))
    coef = ols_fit_blocks(blocks, names=names, weights=wblocks)
    values = dict(zip(names, coef))
    kwargs = {"a0": float(values.get("const", 0.0)), "d": float(values.get("x[n]", 0.0))}
    lag_coefs = [float(values[f"b[n-{i}]"]) for i in spec.lag_indices]
    if spec.full_lags:
        kwargs["a_lags"] = tuple(lag_coefs)
    elif lag_coefs:
        kwargs["a_p"] = lag_coefs[0]

    # drift-only model for the residuals
    sigma0 = 0.0 if spec.covariance_kind != DENSE else np.eye(spec.K)
    drift = VarxModel(spec, sigma=sigma0, **kwargs)
    R = residuals(series, drift)
    sigma = fit_sigma_dense(R) if spec.covariance_kind == DENSE else fit_sigma_diag(R)

    info = {
        "label": spec.label,
        "regressors": names,
        "coefficients": [float(c) for c in coef],
        "residuals": _moments(R),
        "n_rows": int(R.size),
    }
    if spec.use_endogenous:
        tmp = VarxModel(spec, sigma=sigma0, **kwargs)
        spectrum = check_stability(tmp)
        info["stability"] = spectrum.to_dict()
        if not spectrum.stable:
            warnings.warn(f"{spec.label}: companion spectral radius "
                          f"{spectrum.moduli[0]:.6f} >= 1 (non-stationary)", StabilityWarning)
    else:
        info["stability"] = {"moduli": [], "stable": True, "spectral_radius": 0.0}
    return VarxModel(spec, sigma=sigma, provenance=series_digest(series), info=info, **kwargs)


def fit_report(model: VarxModel, series: SampleSeries, max_lag: int = 50) -> dict:
    """JSON-ready fit report: model, residual moments, stability, and the
    pooled ACF/PACF of B used for order selection."""
    report = model.to_dict()
    report["acf_B"] = acf(series.B, max_lag).tolist()
    report["pacf_B"] = pacf(series.B, max_lag).tolist()
    return report
