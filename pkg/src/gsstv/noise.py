"""Mixed Gaussian + salt-and-pepper noise and oracle constraint radii.

Random numbers come from a counter-based SplitMix64 stream so they can be
reproduced bit for bit without numpy. For a 64-bit ``seed`` and a stream
tag ``t``::

    key       = mix64(seed XOR t)
    value[i]  = mix64(key + (i + 1) * 0x9E3779B97F4A7C15)      (mod 2**64)

where ``mix64`` is the SplitMix64 finalizer. Three streams are used:

* ``STREAM_SELECT``: entry ``i`` gets key ``value[i]``; the ``floor(rate*N)``
  entries with the smallest keys (ties by index) are corrupted.
* ``STREAM_SALT``: a corrupted entry ``i`` becomes 1 if the top bit of
  ``value[i]`` is set, else 0.
* ``STREAM_GAUSS``: uniform doubles ``u = ((value >> 11) + 1) * 2**-53`` in
  (0, 1] are paired as ``(u[2m], u[2m+1])`` and mapped with Box-Muller to
  ``n[2m] = r cos(2 pi u[2m+1])``, ``n[2m+1] = r sin(2 pi u[2m+1])`` where
  ``r = sqrt(-2 log u[2m])``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import HsiCube

__all__ = [
    "NoiseSpec",
    "corrupt",
    "oracle_radii",
    "splitmix64_stream",
    "uniform_stream",
    "gaussian_stream",
]

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)

STREAM_SELECT = 0x5345_4C45_4354_0001
STREAM_SALT = 0x5341_4C54_0000_0002
STREAM_GAUSS = 0x4741_5553_5300_0003


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def splitmix64_stream(seed: int, stream: int, count: int) -> np.ndarray:
    """First ``count`` outputs of the tagged SplitMix64 stream, as uint64."""
    with np.errstate(over="ignore"):
        key = _mix64(np.array([(int(seed) ^ int(stream)) & 0xFFFF_FFFF_FFFF_FFFF], dtype=np.uint64))[0]
        ctr = np.arange(1, count + 1, dtype=np.uint64)
        return _mix64(key + ctr * GOLDEN)


def uniform_stream(seed: int, stream: int, count: int) -> np.ndarray:
    """Doubles in (0, 1] built from the top 53 bits of each output."""
    bits = splitmix64_stream(seed, stream, count) >> np.uint64(11)
    return (bits.astype(np.float64) + 1.0) * 2.0**-53


def gaussian_stream(seed: int, stream: int, count: int) -> np.ndarray:
    """Standard normal samples by Box-Muller over consecutive uniform pairs."""
    pairs = (count + 1) // 2
    u = uniform_stream(seed, stream, 2 * pairs).reshape(pairs, 2)
    r = np.sqrt(-2.0 * np.log(u[:, 0]))
    phi = 2.0 * np.pi * u[:, 1]
    return np.column_stack([r * np.cos(phi), r * np.sin(phi)]).reshape(-1)[:count]


@dataclass(frozen=True)
class NoiseSpec:
    gaussian_sigma: float = 0.05
    sp_rate: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if not self.gaussian_sigma >= 0:
            raise ValueError("gaussian_sigma must be >= 0")
        if not 0 <= self.sp_rate < 1:
            raise ValueError("sp_rate must lie in [0, 1)")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def corrupt(clean: HsiCube, spec: NoiseSpec) -> tuple[HsiCube, HsiCube, HsiCube]:
    """Return ``(v, n, s_bar)`` with ``v = clean + s_bar + n``.

    Salt-and-pepper replaces ``floor(sp_rate * N)`` entries (chosen over the
    whole cube) by 0 or 1, recorded as the sparse term ``s_bar``; Gaussian
    noise is then added to every entry, including the replaced ones.
    """
    x = clean.data
    if x.size and (x.min() < 0 or x.max() > 1):
        raise ValueError("clean cube must take values in [0, 1]")
    n_total = x.size

    count = math.floor(spec.sp_rate * n_total)
    s_bar = np.zeros(n_total)
    if count:
        keys = splitmix64_stream(spec.seed, STREAM_SELECT, n_total)
        chosen = np.argsort(keys, kind="stable")[:count]
        salt = (splitmix64_stream(spec.seed, STREAM_SALT, n_total) >> np.uint64(63)).astype(bool)
        forced = np.where(salt[chosen], 1.0, 0.0)
        s_bar[chosen] = forced - x[chosen]

    if spec.gaussian_sigma > 0:
        n = spec.gaussian_sigma * gaussian_stream(spec.seed, STREAM_GAUSS, n_total)
    else:
        n = np.zeros(n_total)

    v = (x + s_bar) + n
    return clean.with_data(v), clean.with_data(n), clean.with_data(s_bar)


def oracle_radii(n: HsiCube, s_bar: HsiCube) -> tuple[float, float]:
    """``(||n||_2, ||s_bar||_1)``, the radii that make the true cube feasible."""
    if n.dims != s_bar.dims:
        raise ValueError("noise cubes must have matching dims")
    return float(np.linalg.norm(n.data)), float(np.abs(s_bar.data).sum())
