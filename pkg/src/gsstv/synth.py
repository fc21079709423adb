"""Synthetic ground-truth cubes with known structure."""

from __future__ import annotations

import numpy as np

from .core import HsiCube

__all__ = ["SYNTH_KINDS", "synth_cube"]

SYNTH_KINDS = ("blocks", "gradient", "circles")


def _smooth_spectra(rng, count: int, n3: int) -> np.ndarray:
    """``count`` smooth spectra in [0.1, 0.9], shape ``(count, n3)``."""
    t = np.linspace(0.0, 1.0, n3)
    base = rng.uniform(0.2, 0.8, size=(count, 1))
    amp = rng.uniform(0.05, 0.2, size=(count, 1))
    freq = rng.uniform(0.3, 1.2, size=(count, 1))
    phase = rng.uniform(0.0, 2 * np.pi, size=(count, 1))
    slope = rng.uniform(-0.15, 0.15, size=(count, 1))
    spec = base + amp * np.sin(2 * np.pi * freq * t + phase) + slope * (t - 0.5)
    return np.clip(spec, 0.1, 0.9)


def _blocks(rng, n1, n2, n3, regions):
    if regions == 1:
        labels = np.zeros((n1, n2), dtype=int)
    else:
        # Voronoi cells around random sites give straight edges at arbitrary angles.
        sites = rng.uniform([0, 0], [n1, n2], size=(regions, 2))
        ii, jj = np.meshgrid(np.arange(n1) + 0.5, np.arange(n2) + 0.5, indexing="ij")
        d2 = (ii[..., None] - sites[:, 0]) ** 2 + (jj[..., None] - sites[:, 1]) ** 2
        labels = np.argmin(d2, axis=-1)
    spectra = _smooth_spectra(rng, regions, n3)
    return spectra[labels]


def _gradient(rng, n1, n2, n3):
    a = rng.uniform(0.2, 0.8)
    ii = np.arange(n1)[:, None] / max(n1 - 1, 1)
    jj = np.arange(n2)[None, :] / max(n2 - 1, 1)
    ramp = a * ii + (1 - a) * jj
    lo, hi = _smooth_spectra(rng, 2, n3)
    return lo[None, None, :] * (1 - ramp[..., None]) + hi[None, None, :] * ramp[..., None]


def _circles(rng, n1, n2, n3, count):
    spectra = _smooth_spectra(rng, count + 1, n3)
    out = np.broadcast_to(spectra[0], (n1, n2, n3)).copy()
    ii, jj = np.meshgrid(np.arange(n1), np.arange(n2), indexing="ij")
    for c in range(count):
        r = rng.uniform(1.2, max(1.5, min(n1, n2) / 6))
        ci, cj = rng.uniform(0, n1 - 1), rng.uniform(0, n2 - 1)
        disc = (ii - ci) ** 2 + (jj - cj) ** 2 <= r * r
        out[disc] = spectra[c + 1]
    return out


def synth_cube(kind: str, dims, seed: int = 0, regions: int | None = None) -> HsiCube:
    """Generate a deterministic synthetic cube with values in [0, 1].

    Parameters
    ----------
    kind : {"blocks", "gradient", "circles"}
        ``blocks``: piecewise-constant Voronoi regions, each with its own
        smooth spectrum. ``gradient``: spatially smooth blend between two
        spectra. ``circles``: small discs on a uniform background.
    dims : (n1, n2, n3)
    seed : int
    regions : int, optional
        Number of blocks (default 6) or discs (default 5).
    """
    n1, n2, n3 = (int(d) for d in dims)
    if kind not in SYNTH_KINDS:
        raise ValueError(f"unknown synthetic kind {kind!r}; choose from {SYNTH_KINDS}")
    if min(n1, n2, n3) < 1:
        raise ValueError(f"invalid dims {dims!r}")
    if kind in ("blocks", "circles") and min(n1, n2, n3) < 2:
        raise ValueError(f"{kind} needs every dimension >= 2, got {dims!r}")
    rng = np.random.default_rng(seed)
    if kind == "blocks":
        regions = 6 if regions is None else int(regions)
        if regions < 1:
            raise ValueError("regions must be >= 1")
        arr = _blocks(rng, n1, n2, n3, regions)
    elif kind == "gradient":
        arr = _gradient(rng, n1, n2, n3)
    else:
        arr = _circles(rng, n1, n2, n3, 5 if regions is None else int(regions))
    return HsiCube.from_array(np.clip(arr, 0.0, 1.0))
