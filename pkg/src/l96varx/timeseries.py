"""Auto-/cross-correlation machinery shared by estimation and diagnostics.

All covariance estimators use the biased ``1/N`` normalisation, which keeps
the autocorrelation sequence positive semi-definite.
"""
from __future__ import annotations

import numpy as np
from scipy import fft as sfft

from .errors import DataError

__all__ = ["autocovariance", "crosscovariance", "acf", "pacf", "pacf_regression"]


def _as_columns(series) -> np.ndarray:
    arr = np.asarray(series, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DataError("expected a 1-D series or an (N, K) matrix")
    return arr


def crosscovariance(a, b, max_lag: int) -> np.ndarray:
    """``c[tau] = (1/N) sum_t (a[t] - mean a) (b[t + tau] - mean b)`` for
    ``tau = 0..max_lag``, column by column.  Inputs are ``(N, K)``;
    output is ``(max_lag + 1, K)``."""
    a = _as_columns(a)
    b = _as_columns(b)
    N = a.shape[0]
    if b.shape != a.shape:
        raise DataError("cross-covariance needs equal shapes")
    if N <= max_lag:
        raise DataError(f"series length {N} must exceed max_lag {max_lag}")
    a = a - a.mean(axis=0)
    b = b - b.mean(axis=0)
    n = sfft.next_fast_len(N + max_lag + 1, real=True)
    fa = sfft.rfft(a, n, axis=0)
    fb = sfft.rfft(b, n, axis=0)
    full = sfft.irfft(np.conj(fa) * fb, n, axis=0)
    return full[: max_lag + 1] / N


def autocovariance(series, max_lag: int) -> np.ndarray:
    """Biased sample autocovariance at lags ``0..max_lag``.

    A 1-D input returns a 1-D array; an ``(N, K)`` input returns
    ``(max_lag + 1, K)``.
    """
    one_d = np.ndim(series) == 1
    out = crosscovariance(series, series, max_lag)
    return out[:, 0] if one_d else out


def acf(series, max_lag: int) -> np.ndarray:
    """Sample autocorrelation at lags ``0..max_lag``.

    For an ``(N, K)`` matrix each column is one realisation; the per-column
    correlations are averaged.
    """
    gamma = autocovariance(_as_columns(series), max_lag)
    var = gamma[0]
    if np.any(var <= 0) or not np.all(np.isfinite(var)):
        raise DataError("autocorrelation of a zero-variance series is undefined")
    rho = (gamma / var).mean(axis=1)
    rho[0] = 1.0
    return rho


def pacf(series, max_lag: int) -> np.ndarray:
    """Partial autocorrelation at lags ``1..max_lag`` by Durbin-Levinson.

    Index ``l - 1`` of the result holds lag ``l``.  Accepts a 1-D series; an
    ``(N, K)`` matrix is reduced with its column-averaged autocovariance.
    """
    gamma = autocovariance(_as_columns(series), max_lag).mean(axis=1)
    if gamma[0] <= 0:
        raise DataError("partial autocorrelation of a zero-variance series is undefined")
    out = np.empty(max_lag)
    phi = np.zeros(max_lag + 1)
    v = gamma[0]
    for l in range(1, max_lag + 1):
        k = (gamma[l] - phi[1:l] @ gamma[l - 1:0:-1]) / v
        prev = phi[1:l].copy()
        phi[1:l] = prev - k * prev[::-1]
        phi[l] = k
        v *= 1.0 - k * k
        out[l - 1] = k
    return out


def pacf_regression(series, max_lag: int) -> np.ndarray:
    """PACF as the last coefficient of successive order-``l`` autoregressions.

    Each regression is solved by least squares on the demeaned series padded
    with zeros at both ends, so that its normal equations are built from the
    same biased autocovariances as :func:`pacf`; the two estimates then agree
    to rounding error rather than only asymptotically.  Cost is
    ``O(N max_lag^2)``; meant as an independent check.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise DataError("pacf_regression expects a 1-D series")
    x = x - x.mean()
    if not np.any(x):
        raise DataError("partial autocorrelation of a zero-variance series is undefined")
    out = np.empty(max_lag)
    for l in range(1, max_lag + 1):
        padded = np.concatenate([np.zeros(l), x, np.zeros(l)])
        n = len(x) + l
        target = padded[l:l + n]
        design = np.column_stack([padded[l - i:l - i + n] for i in range(1, l + 1)])
        coef, *_ = np.linalg.lstsq(design, target, rcond=None)
        out[l - 1] = coef[-1]
    return out
