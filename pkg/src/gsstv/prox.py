"""Projections and proximity operators used by the PDS iteration."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "BoxBounds",
    "BallSpec",
    "project_box",
    "project_l2_ball",
    "project_l1_ball",
    "l1_ball_threshold",
    "soft_threshold",
    "prox_conjugate",
]


@dataclass(frozen=True)
class BoxBounds:
    mu_lo: float = 0.0
    mu_hi: float = 1.0

    def __post_init__(self):
        if not self.mu_lo < self.mu_hi:
            raise ValueError(f"box bounds need mu_lo < mu_hi, got [{self.mu_lo}, {self.mu_hi}]")


@dataclass(frozen=True, eq=False)
class BallSpec:
    """Radius and optional center of an l2 or l1 ball."""

    radius: float
    center: np.ndarray | None = None

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"ball radius must be positive, got {self.radius}")


def project_box(z, bounds: BoxBounds) -> np.ndarray:
    if not bounds.mu_lo < bounds.mu_hi:
        raise ValueError("mu_lo must be smaller than mu_hi")
    return np.clip(z, bounds.mu_lo, bounds.mu_hi)


def project_l2_ball(z, center, radius: float) -> np.ndarray:
    """Project onto ``{x : ||x - center||_2 <= radius}``.

    Points on or inside the ball are returned unchanged. ``radius = 0``
    collapses the ball to its center.
    """
    z = np.asarray(z, dtype=np.float64)
    center = np.asarray(center, dtype=np.float64)
    if radius < 0:
        raise ValueError("radius must be non-negative")
    diff = z - center
    dist = np.linalg.norm(diff)
    if dist <= radius:
        return z.copy()
    return center + (radius / dist) * diff


def l1_ball_threshold(z, radius: float) -> float:
    """Soft-threshold level that maps ``z`` onto the l1 sphere of ``radius``.

    Returns 0 when ``z`` is already inside the ball.
    """
    a = np.abs(np.asarray(z, dtype=np.float64)).reshape(-1)
    if a.sum() <= radius:
        return 0.0
    mu = np.sort(a)[::-1]
    css = np.cumsum(mu)
    j = np.arange(1, mu.size + 1)
    # Largest rho with mu_rho > (css_rho - radius) / rho.
    rho = np.nonzero(mu * j > css - radius)[0][-1]
    theta = (css[rho] - radius) / (rho + 1)
    return max(float(theta), 0.0)


def project_l1_ball(z, radius: float) -> np.ndarray:
    """Euclidean projection onto ``{x : ||x||_1 <= radius}`` by sorting.

    O(n log n) in the length of ``z``.
    """
    if not radius > 0:
        raise ValueError(f"l1 ball radius must be positive, got {radius}")
    z = np.asarray(z, dtype=np.float64)
    theta = l1_ball_threshold(z, radius)
    if theta == 0.0:
        return z.copy()
    return soft_threshold(z, theta)


def soft_threshold(z, gamma: float) -> np.ndarray:
    """``sign(z) * max(|z| - gamma, 0)``, the prox of ``gamma * ||.||_1``."""
    if gamma < 0:
        raise ValueError("threshold must be non-negative")
    z = np.asarray(z, dtype=np.float64)
    return np.sign(z) * np.maximum(np.abs(z) - gamma, 0.0)


def prox_conjugate(prox_f: Callable[[np.ndarray, float], np.ndarray], gamma: float, z) -> np.ndarray:
    """Prox of ``gamma * f^*`` through the Moreau identity.

    ``prox_f(x, t)`` must evaluate ``prox_{t f}(x)``. The result is
    ``z - gamma * prox_f(z / gamma, 1 / gamma)``.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    z = np.asarray(z, dtype=np.float64)
    return z - gamma * prox_f(z / gamma, 1.0 / gamma)
