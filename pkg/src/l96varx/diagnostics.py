"""Long-run statistics of the resolved variables and report comparison.

Conventions
-----------
* PDF: density-normalised histogram pooled over all gridpoints; 100 bins by
  default.  Comparisons reuse the reference report's bin edges.
* ACF / CCF: biased (1/N) estimators, per-gridpoint correlations averaged
  over k.  CCF pairs column k with column k+1 (cyclic) at lags
  ``-L..L``; positive lag means column k+1 lags column k.
* Waves: unnormalised forward DFT over space, ``u_m = sum_k x_k
  exp(-2 pi i m k / K)`` for ``m = 0..K//2``; the variance subtracts the
  complex time mean.
* Modes: local maxima of the 5-bin moving-average density whose
  prominence is at least 5% of the highest smoothed density.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import find_peaks

from .errors import ComparisonError, DataError
from .timeseries import acf, crosscovariance, pacf

__all__ = [
    "DiagnosticsReport",
    "pdf_histogram",
    "acf",
    "ccf",
    "wave_stats",
    "dft_direct",
    "conditional_pdf",
    "count_modes",
    "make_report",
    "compare_reports",
    "evaluate_thresholds",
    "DEFAULT_BINS",
    "DEFAULT_MAX_LAG",
]

DEFAULT_BINS = 100
DEFAULT_MAX_LAG = 1000
SMOOTH_BINS = 5
PROMINENCE = 0.05


def pdf_histogram(samples, n_bins: int = DEFAULT_BINS, range=None):
    """Density histogram of all samples (any shape, flattened).

    The default range spans ``[min, max]`` padded by 1% of the span on each
    side (by 0.5 if all samples are equal).
    """
    values = np.asarray(samples, dtype=float).ravel()
    if values.size == 0:
        raise DataError("cannot build a histogram of no samples")
    if n_bins < 2:
        raise DataError("need at least 2 bins")
    if range is None:
        lo, hi = float(values.min()), float(values.max())
        pad = 0.01 * (hi - lo) if hi > lo else 0.5
        range = (lo - pad, hi + pad)
    density, edges = np.histogram(values, bins=n_bins, range=range, density=True)
    if not np.any(density):
        # everything fell outside the requested range
        density = np.zeros(n_bins)
    return edges, density


def ccf(X, max_lag: int) -> np.ndarray:
    """Lag-resolved correlation between neighbouring gridpoints.

    Returns ``2 * max_lag + 1`` values for lags ``-max_lag..max_lag``;
    ``out[max_lag + tau]`` is ``corr(x_k[t], x_{k+1}[t + tau])`` averaged
    over k.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] < 2:
        raise DataError("ccf needs an (N, K >= 2) matrix")
    Y = np.roll(X, -1, axis=1)
    sd = X.std(axis=0)
    if np.any(sd <= 0):
        raise DataError("cross-correlation of a zero-variance column is undefined")
    norm = sd * np.roll(sd, -1)
    pos = (crosscovariance(X, Y, max_lag) / norm).mean(axis=1)
    neg = (crosscovariance(Y, X, max_lag) / norm).mean(axis=1)
    return np.concatenate([neg[:0:-1], pos])


def wave_stats(X):
    """Time-mean amplitude and variance of each spatial Fourier mode.

    Returns
    -------
    wave_mean, wave_var : ndarray, shape (K//2 + 1,)
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] < 2 or X.shape[0] < 1:
        raise DataError("wave statistics need an (N >= 1, K >= 2) matrix")
    U = np.fft.rfft(X, axis=1)
    mean_u = U.mean(axis=0)
    return np.abs(U).mean(axis=0), (np.abs(U - mean_u) ** 2).mean(axis=0)


def dft_direct(X) -> np.ndarray:
    """O(K^2) spatial DFT, all K wavenumbers, for checking the fast path."""
    X = np.asarray(X, dtype=float)
    K = X.shape[1]
    k = np.arange(K)
    W = np.exp(-2j * np.pi * np.outer(k, k) / K)
    return X @ W.T


def conditional_pdf(series, x_bin_edges, b_bins: int = 50, b_range=None) -> dict:
    """Histogram of b conditioned on x falling into each x-bin.

    Empty x-bins get ``None`` instead of a density.
    """
    x = np.asarray(series.X, dtype=float).ravel()
    b = np.asarray(series.B, dtype=float).ravel()
    edges = np.asarray(x_bin_edges, dtype=float)
    if b_range is None:
        b_range = (float(b.min()), float(b.max()))
    b_edges = np.histogram_bin_edges(b, bins=b_bins, range=b_range)
    which = np.digitize(x, edges) - 1
    which[x == edges[-1]] = len(edges) - 2
    densities, counts, means = [], [], []
    for i in range(len(edges) - 1):
        sel = b[which == i]
        counts.append(int(sel.size))
        if sel.size == 0:
            densities.append(None)
            means.append(None)
        else:
            densities.append(np.histogram(sel, bins=b_edges, density=True)[0])
            means.append(float(sel.mean()))
    return {"x_edges": edges, "b_edges": b_edges, "densities": densities,
            "counts": counts, "means": means}


def count_modes(density, smooth: int = SMOOTH_BINS, prominence: float = PROMINENCE) -> int:
    density = np.asarray(density, dtype=float)
    kernel = np.ones(smooth) / smooth
    smoothed = np.convolve(density, kernel, mode="same")
    top = smoothed.max()
    if top <= 0:
        return 0
    peaks, _ = find_peaks(np.concatenate([[0.0], smoothed, [0.0]]), prominence=prominence * top)
    return int(len(peaks))


@dataclass
class DiagnosticsReport:
    edges: np.ndarray
    density: np.ndarray
    acf: np.ndarray
    ccf: np.ndarray
    wave_mean: np.ndarray
    wave_var: np.ndarray
    mean: float
    std: float
    pacf: np.ndarray | None = None
    n_samples: int = 0

    @property
    def max_lag(self) -> int:
        return len(self.acf) - 1

    @property
    def K(self) -> int:
        return 2 * (len(self.wave_mean) - 1)

    @property
    def modes(self) -> int:
        return count_modes(self.density)

    def to_dict(self) -> dict:
        out = {
            "pdf": {"edges": self.edges.tolist(), "density": self.density.tolist()},
            "acf": self.acf.tolist(),
            "ccf": self.ccf.tolist(),
            "wave_mean": self.wave_mean.tolist(),
            "wave_var": self.wave_var.tolist(),
            "mean": self.mean,
            "std": self.std,
            "modes": self.modes,
            "n_samples": self.n_samples,
        }
        if self.pacf is not None:
            out["pacf"] = self.pacf.tolist()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "DiagnosticsReport":
        pacf_ = data.get("pacf")
        return cls(np.array(data["pdf"]["edges"]), np.array(data["pdf"]["density"]),
                   np.array(data["acf"]), np.array(data["ccf"]),
                   np.array(data["wave_mean"]), np.array(data["wave_var"]),
                   float(data["mean"]), float(data["std"]),
                   None if pacf_ is None else np.array(pacf_), int(data.get("n_samples", 0)))

    def write_csvs(self, directory) -> dict:
        """Write ``pdf.csv``, ``acf.csv``, ``ccf.csv``, ``waves.csv`` (and
        ``pacf.csv`` when present).  Returns the paths by name."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        centers = 0.5 * (self.edges[1:] + self.edges[:-1])
        L = (len(self.ccf) - 1) // 2
        tables = {
            "pdf": (["bin_left", "bin_right", "center", "density"],
                    zip(self.edges[:-1], self.edges[1:], centers, self.density)),
            "acf": (["lag", "acf"], zip(range(len(self.acf)), self.acf)),
            "ccf": (["lag", "ccf"], zip(range(-L, L + 1), self.ccf)),
            "waves": (["wavenumber", "wave_mean", "wave_var"],
                      zip(range(len(self.wave_mean)), self.wave_mean, self.wave_var)),
        }
        if self.pacf is not None:
            tables["pacf"] = (["lag", "pacf"], zip(range(1, len(self.pacf) + 1), self.pacf))
        paths = {}
        for name, (header, rows) in tables.items():
            path = directory / f"{name}.csv"
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(header)
                for row in rows:
                    writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating))
                                     else v for v in row])
            paths[name] = path
        return paths


def make_report(X, n_bins: int = DEFAULT_BINS, pdf_range=None,
                max_lag: int = DEFAULT_MAX_LAG, pacf_series=None,
                pacf_max_lag: int | None = None) -> DiagnosticsReport:
    """All criteria for one ``(N, K)`` record of resolved states.

    ``pdf_range`` should be the reference report's ``(edges[0], edges[-1])``
    when the result is to be compared with it.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] <= max_lag:
        raise DataError(f"need an (N, K) matrix with N > max_lag={max_lag}")
    edges, density = pdf_histogram(X, n_bins, pdf_range)
    wm, wv = wave_stats(X)
    pac = None
    if pacf_series is not None:
        pac = pacf(pacf_series, pacf_max_lag or 50)
    return DiagnosticsReport(edges, density, acf(X, max_lag), ccf(X, max_lag), wm, wv,
                             float(X.mean()), float(X.std()), pac, int(X.shape[0]))


def _rel(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.abs(b - a) / np.abs(a)
    return np.where(np.abs(a) > 0, out, np.where(a == b, 0.0, np.inf))


def compare_reports(ref: DiagnosticsReport, test: DiagnosticsReport,
                    acf_max_lag: int | None = None) -> dict:
    """Distances between two reports built on the same grids.

    ``acf_max_lag`` limits the ACF/CCF comparison to lags ``<= acf_max_lag``
    (default: all common lags).
    """
    if ref.edges.shape != test.edges.shape or not np.allclose(ref.edges, test.edges,
                                                              rtol=1e-12, atol=0):
        raise ComparisonError("PDF bin edges differ; rebuild the test report with the "
                              "reference range")
    if len(ref.acf) != len(test.acf) or len(ref.ccf) != len(test.ccf):
        raise ComparisonError("ACF/CCF lag grids differ")
    if len(ref.wave_mean) != len(test.wave_mean):
        raise ComparisonError("wavenumber grids differ")
    L = ref.max_lag if acf_max_lag is None else min(acf_max_lag, ref.max_lag)
    width = np.diff(ref.edges)
    c = ref.max_lag
    wave_mean_rel = _rel(ref.wave_mean, test.wave_mean)
    wave_var_rel = _rel(ref.wave_var, test.wave_var)
    return {
        "pdf_l1": float(np.sum(np.abs(ref.density - test.density) * width)),
        "acf_max_dev": float(np.max(np.abs(ref.acf[:L + 1] - test.acf[:L + 1]))),
        "ccf_max_dev": float(np.max(np.abs(ref.ccf[c - L:c + L + 1] - test.ccf[c - L:c + L + 1]))),
        "acf_max_lag": int(L),
        "wave_mean_rel": wave_mean_rel.tolist(),
        "wave_var_rel": wave_var_rel.tolist(),
        "wave_mean_rel_max": float(np.max(wave_mean_rel[1:])) if len(wave_mean_rel) > 1 else 0.0,
        "wave_var_rel_max": float(np.max(wave_var_rel[1:])) if len(wave_var_rel) > 1 else 0.0,
        "mean_rel": float(_rel(ref.mean, test.mean)),
        "std_rel": float(_rel(ref.std, test.std)),
        "modes_ref": ref.modes,
        "modes_test": test.modes,
        "wave_peak_ref": int(np.argmax(ref.wave_mean[1:]) + 1),
        "wave_peak_test": int(np.argmax(test.wave_mean[1:]) + 1),
    }


def evaluate_thresholds(summary: dict, thresholds: dict) -> list:
    """Check a comparison summary against threshold rules.

    ``thresholds`` maps a summary key to ``{"max": v}``, ``{"min": v}`` or
    ``{"equals": v}`` (other keys, such as ``acf_max_lag``, are ignored).
    Returns ``(key, passed, value, rule)`` tuples.
    """
    results = []
    for key, rule in thresholds.items():
        if not isinstance(rule, dict):
            continue
        if key not in summary:
            raise ComparisonError(f"threshold refers to unknown quantity {key!r}")
        value = summary[key]
        ok = True
        if "max" in rule:
            ok &= value <= rule["max"]
        if "min" in rule:
            ok &= value >= rule["min"]
        if "equals" in rule:
            ok &= value == rule["equals"]
        if "not_equals" in rule:
            ok &= value != rule["not_equals"]
        results.append((key, bool(ok), value, rule))
    return results
