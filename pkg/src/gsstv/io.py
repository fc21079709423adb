"""``HSC1`` binary cube files.

Layout (all little-endian)::

    offset 0   4 bytes   magic b"HSC1"
    offset 4   uint32    n1 (rows)
    offset 8   uint32    n2 (columns)
    offset 12  uint32    n3 (bands)
    offset 16  float64   n1*n2*n3 values in canonical flat order
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .core import HsiCube

__all__ = ["CubeFormatError", "MAGIC", "read_cube", "write_cube", "encode_cube", "decode_cube", "atomic_write"]

MAGIC = b"HSC1"
_HEADER = struct.Struct("<4sIII")
_MAX_BYTES = 2**40


class CubeFormatError(ValueError):
    """Malformed cube file; ``offset`` is the byte position of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


def encode_cube(cube: HsiCube) -> bytes:
    return _HEADER.pack(MAGIC, cube.n1, cube.n2, cube.n3) + cube.data.astype("<f8").tobytes()


def decode_cube(buf: bytes) -> HsiCube:
    if len(buf) < _HEADER.size:
        raise CubeFormatError(f"truncated header: expected {_HEADER.size} bytes, got {len(buf)}", len(buf))
    magic, n1, n2, n3 = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise CubeFormatError(f"bad magic {magic!r}, expected {MAGIC!r}", 0)
    if min(n1, n2, n3) < 1:
        raise CubeFormatError(f"zero dimension in header ({n1}, {n2}, {n3})", 4)
    expected = 8 * n1 * n2 * n3
    if expected > _MAX_BYTES:
        raise CubeFormatError(f"dims ({n1}, {n2}, {n3}) overflow the payload limit", 4)
    actual = len(buf) - _HEADER.size
    if actual != expected:
        kind = "truncated payload" if actual < expected else "trailing bytes after payload"
        raise CubeFormatError(
            f"{kind}: expected {expected} payload bytes, got {actual}",
            _HEADER.size + min(actual, expected),
        )
    data = np.frombuffer(buf, dtype="<f8", offset=_HEADER.size).astype(np.float64)
    if not np.all(np.isfinite(data)):
        bad = int(np.flatnonzero(~np.isfinite(data))[0])
        raise CubeFormatError("non-finite value in payload", _HEADER.size + 8 * bad)
    return HsiCube(n1, n2, n3, data)


def read_cube(path) -> HsiCube:
    return decode_cube(Path(path).read_bytes())


def atomic_write(path, payload: bytes | str):
    """Write to a temporary file in the target directory, then rename."""
    path = Path(path)
    if isinstance(payload, str):
        payload = payload.encode()
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_cube(cube: HsiCube, path):
    atomic_write(path, encode_cube(cube))
