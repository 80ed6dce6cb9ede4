"""Byte-stable serialization helpers: canonical JSON, base64 float blocks,
FNV-1a checksums, atomic file writes."""

from __future__ import annotations

import base64
import json
import os
import tempfile

import numpy as np

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def checksum_hex(data: bytes) -> str:
    return format(fnv1a64(data), "016x")


def float_bytes(arr: np.ndarray) -> bytes:
    """Row-major little-endian float64 bytes of an array."""
    return np.ascontiguousarray(arr, dtype="<f8").tobytes()


def encode_floats(arr: np.ndarray) -> str:
    return base64.b64encode(float_bytes(arr)).decode("ascii")


def decode_floats(text: str, shape: tuple[int, ...]) -> np.ndarray:
    raw = base64.b64decode(text.encode("ascii"), validate=True)
    expected = int(np.prod(shape)) * 8
    if len(raw) != expected:
        raise ValueError(
            f"float block holds {len(raw)} bytes, expected {expected}")
    return np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(shape)


def canonical_json_bytes(doc) -> bytes:
    """Deterministic UTF-8 encoding: sorted keys, two-space indent."""
    return (json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False)
            + "\n").encode("utf-8")


def atomic_write_bytes(path: str, data: bytes) -> None:
    """Write via a temp file in the same directory plus rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
