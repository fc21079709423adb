"""Band-averaged PSNR and SSIM for cubes normalized to [0, 1]."""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.ndimage import gaussian_filter

from .core import HsiCube

__all__ = ["psnr_band", "ssim_band", "mpsnr", "mssim", "SSIM_SIGMA", "SSIM_RADIUS"]

SSIM_SIGMA = 1.5
SSIM_RADIUS = 5  # 11 x 11 window
SSIM_K1, SSIM_K2 = 0.01, 0.03


def psnr_band(u_k, ubar_k, n1: int | None = None, n2: int | None = None) -> float:
    """``10 log10(n1 n2 / ||u_k - ubar_k||^2)`` with unit peak; ``inf`` on zero error."""
    u_k = np.asarray(u_k, dtype=np.float64)
    ubar_k = np.asarray(ubar_k, dtype=np.float64)
    if u_k.shape != ubar_k.shape:
        raise ValueError(f"band shapes differ: {u_k.shape} vs {ubar_k.shape}")
    npix = u_k.size
    if n1 is not None and n2 is not None and n1 * n2 != npix:
        raise ValueError(f"band has {npix} pixels, expected {n1}x{n2}")
    err = float(np.sum((u_k - ubar_k) ** 2))
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(npix / err)


def _filt(img):
    return gaussian_filter(img, SSIM_SIGMA, mode="reflect", truncate=SSIM_RADIUS / SSIM_SIGMA)


def ssim_band(x, y, data_range: float = 1.0) -> float:
    """Mean SSIM of two 2-D images with a Gaussian window.

    Local statistics use an 11x11 Gaussian window (sigma 1.5) with
    symmetric boundary extension, so the SSIM map has the image's size.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"band shapes differ: {x.shape} vs {y.shape}")
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2
    mx, my = _filt(x), _filt(y)
    sxx = _filt(x * x) - mx * mx
    syy = _filt(y * y) - my * my
    sxy = _filt(x * y) - mx * my
    num = (2.0 * mx * my + c1) * (2.0 * sxy + c2)
    den = (mx * mx + my * my + c1) * (sxx + syy + c2)
    return float(np.mean(num / den))


def _check(u: HsiCube, ubar: HsiCube):
    if u.dims != ubar.dims:
        raise ValueError(f"cube dims differ: {u.dims} vs {ubar.dims}")


def mpsnr(u: HsiCube, ubar: HsiCube) -> float:
    """Mean over bands of :func:`psnr_band`.

    Bands reproduced exactly (infinite PSNR) are left out of the mean with a
    warning; if every band is exact the result is ``inf``.
    """
    _check(u, ubar)
    a, b = u.bands(), ubar.bands()
    vals = [psnr_band(a[k], b[k]) for k in range(u.n3)]
    finite = [p for p in vals if math.isfinite(p)]
    if len(finite) < len(vals):
        warnings.warn(
            f"{len(vals) - len(finite)} band(s) have zero error and are excluded from MPSNR",
            RuntimeWarning,
            stacklevel=2,
        )
    if not finite:
        return math.inf
    return float(np.mean(finite))


def mssim(u: HsiCube, ubar: HsiCube) -> float:
    _check(u, ubar)
    return float(np.mean([ssim_band(u.band(k), ubar.band(k)) for k in range(u.n3)]))
