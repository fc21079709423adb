"""Hyperspectral cube container, canonical vectorization and guide image.

A cube of size ``n1 x n2 x n3`` (rows, columns, bands) is stored as a flat
float64 vector. Each band is vectorized column-major and the bands are
stacked in order, so entry ``(i, j, k)`` lives at ``k*n1*n2 + j*n1 + i``.
Reshaping the flat vector to ``(n3, n2, n1)`` in C order therefore gives a
view indexed as ``[k, j, i]``; the operators in :mod:`gsstv.linops` work on
that view.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["HsiCube", "GuideImage", "flat_index", "unflat_index", "band_mean"]


def _as_flat(data, length: int, what: str) -> np.ndarray:
    arr = np.ascontiguousarray(data, dtype=np.float64).reshape(-1)
    if arr.size != length:
        raise ValueError(f"{what}: expected {length} values, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what}: data contains NaN or Inf")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class HsiCube:
    """Real ``n1 x n2 x n3`` cube stored in canonical flat order.

    The flat vector is read-only; arithmetic should go through ``data`` or
    :meth:`to_array` and build a new cube.
    """

    n1: int
    n2: int
    n3: int
    data: np.ndarray

    def __post_init__(self):
        for name in ("n1", "n2", "n3"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")
            object.__setattr__(self, name, int(getattr(self, name)))
        object.__setattr__(self, "data", _as_flat(self.data, self.size, "HsiCube"))

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.n1, self.n2, self.n3)

    @property
    def size(self) -> int:
        return self.n1 * self.n2 * self.n3

    @classmethod
    def from_array(cls, arr) -> "HsiCube":
        """Build from an array indexed ``[row, column, band]``."""
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3:
            raise ValueError(f"expected a 3-D array, got shape {arr.shape}")
        return cls(*arr.shape, arr.ravel(order="F"))

    def to_array(self) -> np.ndarray:
        """Copy of the cube as an ``(n1, n2, n3)`` array."""
        return self.data.reshape(self.dims, order="F").copy()

    def bands(self) -> np.ndarray:
        """Read-only ``(n3, n2, n1)`` view, i.e. ``[k, j, i]`` indexing."""
        return self.data.reshape(self.n3, self.n2, self.n1)

    def band(self, k: int) -> np.ndarray:
        """Band ``k`` as an ``(n1, n2)`` array."""
        return self.bands()[k].T

    def with_data(self, data) -> "HsiCube":
        return HsiCube(self.n1, self.n2, self.n3, data)

    def __eq__(self, other):
        if not isinstance(other, HsiCube):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self.data, other.data)

    def __repr__(self):
        return f"HsiCube(n1={self.n1}, n2={self.n2}, n3={self.n3})"


@dataclass(frozen=True, eq=False)
class GuideImage:
    """Grayscale ``n1 x n2`` image, flat column-major."""

    n1: int
    n2: int
    data: np.ndarray

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("guide image dims must be >= 1")
        object.__setattr__(self, "data", _as_flat(self.data, self.n1 * self.n2, "GuideImage"))

    def to_array(self) -> np.ndarray:
        return self.data.reshape((self.n1, self.n2), order="F").copy()


def _check_dims(dims) -> tuple[int, int, int]:
    if len(dims) != 3 or any(int(d) < 1 for d in dims):
        raise ValueError(f"invalid cube dims {dims!r}")
    return tuple(int(d) for d in dims)


def flat_index(i: int, j: int, k: int, dims) -> int:
    """Linear position of entry ``(i, j, k)`` (0-based) in a cube of ``dims``.

    >>> flat_index(1, 0, 1, (2, 3, 2))
    7
    """
    n1, n2, n3 = _check_dims(dims)
    if not (0 <= i < n1 and 0 <= j < n2 and 0 <= k < n3):
        raise ValueError(f"index ({i}, {j}, {k}) out of range for dims {dims}")
    return k * n1 * n2 + j * n1 + i


def unflat_index(idx: int, dims) -> tuple[int, int, int]:
    """Inverse of :func:`flat_index`."""
    n1, n2, n3 = _check_dims(dims)
    if not 0 <= idx < n1 * n2 * n3:
        raise ValueError(f"flat index {idx} out of range for dims {dims}")
    k, rem = divmod(idx, n1 * n2)
    j, i = divmod(rem, n1)
    return i, j, k


def band_mean(cube: HsiCube) -> GuideImage:
    """Average the cube along the spectral axis."""
    return GuideImage(cube.n1, cube.n2, cube.bands().mean(axis=0).reshape(-1))
