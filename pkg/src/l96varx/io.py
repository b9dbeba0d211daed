"""On-disk formats.

Columnar binary series (``.l96s`` for reference samples, ``.l96r`` for reduced
trajectories); all integers and floats little-endian::

    offset  size  field
    0       4     magic, b"L96S" or b"L96R"
    4       4     format version (uint32), currently 1
    8       4     K (uint32)
    12      8     N (uint64)
    20      8     sample interval (float64)
    28      32    provenance hash (raw SHA-256 digest)
    60      8*N*K X block, row-major float64
    ...     8*N*K B block, row-major float64

A JSON sidecar (``<file>.json``) carries free-form metadata.  The CSV export
has one row per sample and columns ``x_1..x_K, b_1..b_K`` written with 17
significant digits, which round-trips float64 exactly.
"""
from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .errors import DataError
from .l96 import SampleSeries

__all__ = [
    "SERIES_MAGIC",
    "TRAJECTORY_MAGIC",
    "FORMAT_VERSION",
    "write_series",
    "read_series",
    "series_to_bytes",
    "series_from_bytes",
    "write_csv",
    "read_csv",
    "write_json",
    "read_json",
    "sidecar_path",
]

SERIES_MAGIC = b"L96S"
TRAJECTORY_MAGIC = b"L96R"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIIQd32s")


def _digest(tag: str) -> bytes:
    try:
        raw = bytes.fromhex(tag)
    except ValueError:
        raw = b""
    if len(raw) != 32:
        raw = hashlib.sha256(tag.encode()).digest()
    return raw


def series_to_bytes(X, B, sample_interval: float, tag: str, magic: bytes = SERIES_MAGIC) -> bytes:
    X = np.asarray(X, dtype="<f8")
    B = np.asarray(B, dtype="<f8")
    if X.ndim != 2 or X.shape != B.shape:
        raise DataError(f"X{X.shape} and B{B.shape} must be equal 2-D shapes")
    N, K = X.shape
    header = _HEADER.pack(magic, FORMAT_VERSION, K, N, float(sample_interval), _digest(tag))
    return header + np.ascontiguousarray(X).tobytes() + np.ascontiguousarray(B).tobytes()


def series_from_bytes(blob: bytes, magic: bytes | None = None):
    """Decode a binary series.  Returns ``(magic, X, B, sample_interval, tag)``."""
    if len(blob) < _HEADER.size:
        raise DataError("file too short for an L96 series header")
    got, version, K, N, dt, digest = _HEADER.unpack_from(blob)
    if got not in (SERIES_MAGIC, TRAJECTORY_MAGIC) or (magic is not None and got != magic):
        raise DataError(f"bad magic {got!r}")
    if version != FORMAT_VERSION:
        raise DataError(f"unsupported format version {version}")
    expected = _HEADER.size + 16 * N * K
    if len(blob) != expected:
        raise DataError(f"payload size {len(blob)} does not match header (expected {expected})")
    body = np.frombuffer(blob, dtype="<f8", offset=_HEADER.size)
    X = body[: N * K].reshape(N, K).astype(float)
    B = body[N * K:].reshape(N, K).astype(float)
    return got, X, B, dt, digest.hex()


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


def write_series(path, series: SampleSeries, magic: bytes = SERIES_MAGIC) -> None:
    Path(path).write_bytes(series_to_bytes(series.X, series.B, series.sample_interval,
                                           series.config_id, magic))


def read_series(path) -> SampleSeries:
    """Read either an ``L96S`` or ``L96R`` file as a :class:`SampleSeries`.

    The sidecar, when present, is loaded into ``meta``.
    """
    magic, X, B, dt, tag = series_from_bytes(Path(path).read_bytes())
    side = sidecar_path(path)
    meta = read_json(side) if side.exists() else {}
    meta.setdefault("magic", magic.decode())
    return SampleSeries(X, B, dt, tag, meta)


def write_csv(path, series: SampleSeries) -> None:
    K = series.K
    header = ",".join([f"x_{k + 1}" for k in range(K)] + [f"b_{k + 1}" for k in range(K)])
    data = np.hstack([series.X, series.B])
    np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g")


def read_csv(path, sample_interval: float, config_id: str = "") -> SampleSeries:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    K = len(header) // 2
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2).reshape(-1, 2 * K)
    return SampleSeries(data[:, :K], data[:, K:], sample_interval, config_id)
