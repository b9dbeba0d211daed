"""Model configurations for the two-layer Lorenz '96 system.

Two presets are provided, ``unimodal`` and ``trimodal``.  Every field can be
overridden, either programmatically via :func:`dataclasses.replace` or through
a flat ``key = value`` text file (see :func:`load_config_file`).
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError

__all__ = [
    "ModelConfig",
    "PRESETS",
    "preset",
    "load_config_file",
    "parse_config_text",
]

_INT_FIELDS = ("K", "J", "n_samples")


@dataclass(frozen=True)
class ModelConfig:
    """Physical and numerical parameters of one L96 configuration.

    Attributes
    ----------
    epsilon : float
        Time-scale gap between the x and y layers.
    K, J : int
        Number of large-scale points, and small-scale points per large-scale
        point.
    F : float
        Constant forcing on x.
    h_x, h_y : float
        Fast-to-slow and slow-to-fast coupling constants.
    dt_full : float
        Step of the full (x, y) integration.
    dt_reduced : float
        Step of the reduced x-only integration; must equal ``sample_interval``.
    sample_interval : float
        Time between recorded samples; an integer multiple of ``dt_full``.
    n_samples : int
        Number of recorded rows N.
    burn_in : float
        Model time discarded before recording starts.
    name : str
        Free-form label, echoed into metadata.
    """

    epsilon: float
    K: int
    J: int
    F: float
    h_x: float
    h_y: float
    dt_full: float = 1e-3
    dt_reduced: float = 1e-2
    sample_interval: float = 1e-2
    n_samples: int = 1_000_000
    burn_in: float = 100.0
    name: str = "custom"

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 4:
            raise ConfigError(f"K must be an integer >= 4, got {self.K!r}")
        if int(self.J) != self.J or self.J < 4:
            raise ConfigError(f"J must be an integer >= 4, got {self.J!r}")
        if int(self.n_samples) != self.n_samples or self.n_samples < 0:
            raise ConfigError(f"n_samples must be a non-negative integer, got {self.n_samples!r}")
        for field in ("epsilon", "dt_full", "dt_reduced", "sample_interval"):
            value = getattr(self, field)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"{field} must be positive and finite, got {value!r}")
        for field in ("F", "h_x", "h_y", "burn_in"):
            if not math.isfinite(getattr(self, field)):
                raise ConfigError(f"{field} must be finite")
        if self.burn_in < 0:
            raise ConfigError("burn_in must be non-negative")
        ratio = self.sample_interval / self.dt_full
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio) or round(ratio) < 1:
            raise ConfigError(
                f"sample_interval={self.sample_interval} is not an integer multiple "
                f"of dt_full={self.dt_full}"
            )
        if not math.isclose(self.dt_reduced, self.sample_interval, rel_tol=1e-12):
            raise ConfigError(
                f"dt_reduced={self.dt_reduced} must equal sample_interval={self.sample_interval}"
            )
        # normalise integer fields given as floats (e.g. from a text file)
        for field in _INT_FIELDS:
            object.__setattr__(self, field, int(getattr(self, field)))

    @property
    def steps_per_sample(self) -> int:
        return int(round(self.sample_interval / self.dt_full))

    @property
    def burn_in_steps(self) -> int:
        return int(round(self.burn_in / self.dt_full))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown configuration field(s): {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def config_hash(self) -> str:
        """SHA-256 hex digest of the canonical JSON form."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def scaled(self, scale: int) -> "ModelConfig":
        """Copy with ``n_samples`` divided (integer) by ``scale``."""
        if int(scale) != scale or scale < 1:
            raise ConfigError(f"scale must be a positive integer, got {scale!r}")
        return dataclasses.replace(self, n_samples=self.n_samples // int(scale))


# N = 10**6 + p, p being the VARX order selected for each configuration (14 / 30).
PRESETS = {
    "unimodal": ModelConfig(
        epsilon=0.5, K=18, J=20, F=10.0, h_x=-1.0, h_y=1.0,
        n_samples=1_000_000 + 14, name="unimodal",
    ),
    "trimodal": ModelConfig(
        epsilon=0.5, K=32, J=16, F=18.0, h_x=-3.2, h_y=1.0,
        n_samples=1_000_000 + 30, name="trimodal",
    ),
}


def preset(name: str, **overrides) -> ModelConfig:
    """Return a named preset, optionally with some fields replaced."""
    try:
        base = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    if overrides:
        return ModelConfig.from_dict({**base.to_dict(), **overrides})
    return base


def _coerce(key, raw):
    if key == "name" or key == "preset":
        return raw
    try:
        if key in _INT_FIELDS:
            value = float(raw)
            if value != int(value):
                raise ValueError
            return int(value)
        return float(raw)
    except ValueError:
        raise ConfigError(f"field {key!r}: cannot parse value {raw!r}") from None


def parse_config_text(text: str, base: str | None = None) -> ModelConfig:
    """Parse the flat ``key = value`` configuration format.

    Blank lines and ``#`` comments are ignored.  A ``preset = <name>`` line
    (or the ``base`` argument) selects the starting values; all other keys
    override individual fields.  Without a preset every field except the ones
    that have defaults must be given.
    """
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        values[key] = _coerce(key, raw)
    name = values.pop("preset", base)
    if name is not None:
        return preset(name, **values)
    required = [f.name for f in dataclasses.fields(ModelConfig)
                if f.default is dataclasses.MISSING]
    missing = [f for f in required if f not in values]
    if missing:
        raise ConfigError(f"no preset given and missing field(s): {', '.join(missing)}")
    return ModelConfig.from_dict(values)


def load_config_file(path, base: str | None = None) -> ModelConfig:
    return parse_config_text(Path(path).read_text(), base=base)
