"""Graph spatio-spectral total variation (GSSTV) denoising for hyperspectral cubes."""

from .core import GuideImage, HsiCube, band_mean, flat_index, unflat_index
from .graph import GraphParams, SpatialGraph, build_graph
from .metrics import mpsnr, mssim
from .noise import NoiseSpec, corrupt, oracle_radii
from .prox import BoxBounds
from .solver import ProblemSpec, Regularizer, SolverConfig, solve

__version__ = "0.1.0"

__all__ = [
    "HsiCube",
    "GuideImage",
    "band_mean",
    "flat_index",
    "unflat_index",
    "GraphParams",
    "SpatialGraph",
    "build_graph",
    "BoxBounds",
    "NoiseSpec",
    "corrupt",
    "oracle_radii",
    "ProblemSpec",
    "Regularizer",
    "SolverConfig",
    "solve",
    "mpsnr",
    "mssim",
]
