"""VARX(p) surrogate for the small-scale feedback.

The process is

    b[n] = a0 + sum_i A_i b[n-i] + D x[n] + Sigma xi[n],   xi[n] ~ N(0, I)

with every drift matrix a scalar multiple of the identity (a spatially
homogeneous system has one coefficient per regressor).  By default only the
lag-``p`` matrix is nonzero; ``VarxSpec(full_lags=True)`` keeps all lags
``1..p``.  The noise root is either ``sigma * I`` or a dense lower-triangular
Cholesky factor ``L``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericalError, StateError

__all__ = [
    "DIAGONAL",
    "DENSE",
    "VarxSpec",
    "VarxModel",
    "LagBuffer",
    "CompanionSpectrum",
    "named_spec",
    "varx_step",
    "build_companion",
    "check_stability",
]

DIAGONAL = "diagonal_iso"
DENSE = "dense"


@dataclass(frozen=True)
class VarxSpec:
    """Sparsity structure of a VARX model.

    ``p`` is the lag of the single nonzero endogenous matrix (or the maximum
    lag when ``full_lags`` is set); it must be 0 exactly when there is no
    endogenous regressor.
    """

    K: int
    p: int = 0
    use_endogenous: bool = False
    use_exogenous: bool = False
    covariance_kind: str = DIAGONAL
    intercept: bool = True
    full_lags: bool = False

    def __post_init__(self):
        if self.K < 1:
            raise ConfigError("K must be positive")
        if self.p < 0:
            raise ConfigError("p must be non-negative")
        if self.use_endogenous and self.p == 0:
            raise ConfigError("an endogenous regressor needs p >= 1")
        if not self.use_endogenous and self.p != 0:
            raise ConfigError("p must be 0 when use_endogenous is false")
        if self.covariance_kind not in (DIAGONAL, DENSE):
            raise ConfigError(f"covariance_kind must be {DIAGONAL!r} or {DENSE!r}")

    @property
    def label(self) -> str:
        if not self.use_endogenous and not self.use_exogenous:
            name = "WN"
        elif not self.use_exogenous:
            name = f"AR({self.p})" if self.p > 1 else "Multi AR(1)"
        elif not self.use_endogenous:
            name = "WND"
        else:
            name = f"VARX({self.p})"
        return f"{name} {'Sigma_L' if self.covariance_kind == DENSE else 'Sigma_D'}"

    @property
    def lag_indices(self) -> tuple:
        if not self.use_endogenous:
            return ()
        return tuple(range(1, self.p + 1)) if self.full_lags else (self.p,)

    def to_dict(self) -> dict:
        return {
            "K": self.K, "p": self.p, "use_endogenous": self.use_endogenous,
            "use_exogenous": self.use_exogenous, "covariance_kind": self.covariance_kind,
            "intercept": self.intercept, "full_lags": self.full_lags,
        }


def named_spec(name: str, K: int, p: int | None = None, cov: str = "diag") -> VarxSpec:
    """Build one of the compared parameterizations by short name.

    ``name`` is one of ``wn``, ``ar1``, ``wnd``, ``varx``; ``cov`` is
    ``diag`` or ``dense``.
    """
    kind = {"diag": DIAGONAL, "dense": DENSE, DIAGONAL: DIAGONAL}.get(cov)
    if kind is None:
        raise ConfigError(f"cov must be 'diag' or 'dense', got {cov!r}")
    name = name.lower()
    if name == "wn":
        return VarxSpec(K, covariance_kind=kind)
    if name == "ar1":
        return VarxSpec(K, p=1, use_endogenous=True, covariance_kind=kind)
    if name == "wnd":
        return VarxSpec(K, use_exogenous=True, covariance_kind=kind)
    if name == "varx":
        if not p:
            raise ConfigError("varx needs an order p >= 1")
        return VarxSpec(K, p=p, use_endogenous=True, use_exogenous=True, covariance_kind=kind)
    raise ConfigError(f"unknown parameterization {name!r}")


@dataclass(frozen=True, eq=False)
class CompanionSpectrum:
    moduli: np.ndarray
    stable: bool

    def to_dict(self) -> dict:
        return {"moduli": [float(m) for m in self.moduli], "stable": bool(self.stable),
                "spectral_radius": float(self.moduli[0]) if len(self.moduli) else 0.0}


@dataclass(frozen=True, eq=False)
class VarxModel:
    """Fitted VARX coefficients.

    ``a_p`` is the endogenous coefficient of the highest lag.  In full-lag
    mode ``a_lags`` holds the coefficients of lags ``1..p`` (so
    ``a_lags[-1] == a_p``); otherwise it is empty.  ``sigma`` is a float
    for ``diagonal_iso`` noise and a ``(K, K)`` lower-triangular array for
    ``dense`` noise.
    """

    spec: VarxSpec
    a0: float = 0.0
    a_p: float = 0.0
    d: float = 0.0
    sigma: object = 0.0
    a_lags: tuple = ()
    provenance: str = ""
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        coeffs = [self.a0, self.a_p, self.d, *self.a_lags]
        if not np.all(np.isfinite(coeffs)):
            raise ConfigError("VARX coefficients must be finite")
        if self.spec.full_lags and self.spec.use_endogenous:
            if len(self.a_lags) != self.spec.p:
                raise ConfigError(f"full-lag model needs {self.spec.p} lag coefficients")
            object.__setattr__(self, "a_lags", tuple(float(a) for a in self.a_lags))
            object.__setattr__(self, "a_p", self.a_lags[-1])
        if self.spec.covariance_kind == DIAGONAL:
            sigma = float(self.sigma)
            if not (np.isfinite(sigma) and sigma >= 0):
                raise ConfigError(f"sigma must be finite and >= 0, got {self.sigma!r}")
            object.__setattr__(self, "sigma", sigma)
        else:
            L = np.array(self.sigma, dtype=float)
            K = self.spec.K
            if L.shape != (K, K):
                raise ConfigError(f"dense noise root must have shape ({K}, {K}), got {L.shape}")
            if not np.all(np.isfinite(L)) or np.any(np.triu(L, 1) != 0) or np.any(np.diag(L) < 0):
                raise ConfigError("dense noise root must be lower triangular with "
                                  "nonnegative diagonal")
            L.setflags(write=False)
            object.__setattr__(self, "sigma", L)

    @property
    def K(self) -> int:
        return self.spec.K

    @property
    def p(self) -> int:
        return self.spec.p

    def lag_coefficients(self) -> dict:
        """Mapping lag -> scalar coefficient for every active lag."""
        if not self.spec.use_endogenous:
            return {}
        if self.spec.full_lags:
            return {i + 1: a for i, a in enumerate(self.a_lags)}
        return {self.spec.p: self.a_p}

    def noise(self, xi: np.ndarray) -> np.ndarray:
        if self.spec.covariance_kind == DIAGONAL:
            return self.sigma * xi
        return self.sigma @ xi

    def to_dict(self) -> dict:
        out = {
            "kind": "varx",
            "label": self.spec.label,
            "spec": self.spec.to_dict(),
            "a0": self.a0,
            "a_p": self.a_p,
            "d": self.d,
            "provenance": self.provenance,
        }
        if self.spec.full_lags:
            out["a_lags"] = list(self.a_lags)
        if self.spec.covariance_kind == DIAGONAL:
            out["sigma"] = self.sigma
        else:
            out["L"] = self.sigma.tolist()
        if self.info:
            out["info"] = self.info
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "VarxModel":
        spec = VarxSpec(**data["spec"])
        sigma = data["sigma"] if spec.covariance_kind == DIAGONAL else np.array(data["L"])
        return cls(spec, data["a0"], data["a_p"], data["d"], sigma,
                   tuple(data.get("a_lags", ())), data.get("provenance", ""),
                   data.get("info", {}))


class LagBuffer:
    """Ring buffer of the last ``depth`` parameterization outputs.

    ``lag(i)`` returns the vector pushed ``i`` pushes ago (``lag(1)`` is the
    most recent).
    """

    def __init__(self, depth: int, K: int):
        self.depth = int(depth)
        self.K = int(K)
        self._data = np.zeros((max(self.depth, 1), self.K))
        self._head = 0
        self._count = 0

    @classmethod
    def from_history(cls, rows) -> "LagBuffer":
        """Seed from rows ordered oldest first; the buffer depth is ``len(rows)``."""
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        buf = cls(rows.shape[0], rows.shape[1])
        for row in rows:
            buf.push(row)
        return buf

    @property
    def seeded(self) -> bool:
        return self._count >= self.depth

    def __len__(self) -> int:
        return min(self._count, self.depth)

    def push(self, value) -> None:
        if self.depth == 0:
            return
        self._data[self._head] = value
        self._head = (self._head + 1) % self.depth
        self._count += 1

    def lag(self, i: int) -> np.ndarray:
        if not 1 <= i <= self.depth:
            raise StateError(f"lag {i} outside buffer depth {self.depth}")
        if i > self._count:
            raise StateError(f"lag {i} requested but only {self._count} value(s) pushed")
        return self._data[(self._head - i) % self.depth]


def varx_step(model: VarxModel, lags: LagBuffer | None, x_now, xi) -> np.ndarray:
    """Draw the next parameterization output given standard-normal ``xi``.

    The buffer is read, not modified; the caller pushes the result.
    """
    spec = model.spec
    out = np.full(spec.K, model.a0)
    if spec.use_endogenous:
        if lags is None:
            raise StateError("endogenous VARX step needs a lag history")
        for i, a in model.lag_coefficients().items():
            out += a * lags.lag(i)
    if spec.use_exogenous:
        out += model.d * np.asarray(x_now)
    out += model.noise(np.asarray(xi))
    return out


def _lag_polynomial(model: VarxModel) -> np.ndarray:
    """Coefficients of the scalar lag polynomial ``A_1..A_p`` (index 0 = lag 1)."""
    if not model.spec.use_endogenous or model.p < 1:
        raise ConfigError("companion matrix needs p >= 1")
    coeffs = np.zeros(model.p)
    for lag, a in model.lag_coefficients().items():
        coeffs[lag - 1] = a
    return coeffs


def build_companion(model: VarxModel) -> np.ndarray:
    """Block companion matrix, size ``pK x pK``: top block row ``A_1..A_p``,
    identity blocks on the first block subdiagonal."""
    coeffs = _lag_polynomial(model)
    p, K = model.p, model.K
    eye = np.eye(K)
    C = np.zeros((p * K, p * K))
    for i, a in enumerate(coeffs):
        C[:K, i * K:(i + 1) * K] = a * eye
    if p > 1:
        C[K:, :-K] = np.eye((p - 1) * K)
    return C


def check_stability(model: VarxModel, method: str = "auto") -> CompanionSpectrum:
    """Eigenvalue moduli of the companion matrix, sorted descending.

    ``method`` is ``"closed_form"`` (roots of ``lam^p - a_p``, each with
    multiplicity K), ``"roots"`` (scalar lag polynomial, multiplicity K),
    ``"eig"`` (general eigensolver on the full companion matrix) or
    ``"auto"`` (closed form for single-lag models, roots otherwise).
    """
    coeffs = _lag_polynomial(model)
    p, K = model.p, model.K
    if method == "auto":
        method = "roots" if model.spec.full_lags else "closed_form"
    if method == "closed_form":
        if np.count_nonzero(coeffs[:-1]):
            raise ConfigError("closed form only applies to a single nonzero lag")
        moduli = np.full(p * K, abs(coeffs[-1]) ** (1.0 / p))
    elif method == "roots":
        roots = np.roots(np.concatenate([[1.0], -coeffs])) if p else np.array([])
        roots = np.concatenate([roots, np.zeros(p - len(roots))])
        moduli = np.repeat(np.abs(roots), K)
    elif method == "eig":
        try:
            moduli = np.abs(np.linalg.eigvals(build_companion(model)))
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"eigensolver failed: {exc}") from None
    else:
        raise ConfigError(f"unknown method {method!r}")
    moduli = np.sort(moduli)[::-1]
    return CompanionSpectrum(moduli, bool(moduli[0] < 1.0))
