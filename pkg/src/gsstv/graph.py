"""Weighted 8-neighbour spatial graph built from a guide image."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import GuideImage

__all__ = [
    "GraphParams",
    "SpatialGraph",
    "NEIGHBOR_OFFSETS",
    "build_graph",
    "incidence_pattern",
    "laplacian",
]

# (row offset, column offset) in enumeration order: E, S, SE, SW.
NEIGHBOR_OFFSETS = ((0, 1), (1, 0), (1, 1), (1, -1))


@dataclass(frozen=True)
class GraphParams:
    """Edge weight scales: spatial distance ``sigma_l`` and intensity ``sigma_x``."""

    sigma_l: float = 2.0
    sigma_x: float = 0.1

    def __post_init__(self):
        if not (self.sigma_l > 0 and self.sigma_x > 0):
            raise ValueError(
                f"sigma_l and sigma_x must be positive, got {self.sigma_l}, {self.sigma_x}"
            )


@dataclass(frozen=True, eq=False)
class SpatialGraph:
    """Edges ``(p, q)`` with ``p < q`` over an ``n1 x n2`` pixel grid.

    Pixels are numbered column-major (``p = j*n1 + i``). ``heads`` holds the
    smaller index of every edge, ``tails`` the larger one.
    """

    n1: int
    n2: int
    heads: np.ndarray
    tails: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        for name in ("heads", "tails", "weights"):
            arr = np.array(getattr(self, name), dtype=np.float64 if name == "weights" else np.int64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (self.heads.shape == self.tails.shape == self.weights.shape):
            raise ValueError("heads, tails and weights must have equal length")
        if self.num_edges:
            if np.any(self.heads >= self.tails):
                raise ValueError("every edge must satisfy p < q")
            if self.heads.min() < 0 or self.tails.max() >= self.num_pixels:
                raise ValueError("edge endpoint outside the pixel grid")
            if np.any(self.weights <= 0) or np.any(self.weights > 1):
                raise ValueError("edge weights must lie in (0, 1]")

    @property
    def num_pixels(self) -> int:
        return self.n1 * self.n2

    @property
    def num_edges(self) -> int:
        return int(self.heads.size)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return list(zip(self.heads.tolist(), self.tails.tolist()))

    def with_weights(self, weights) -> "SpatialGraph":
        return SpatialGraph(self.n1, self.n2, self.heads, self.tails, weights)


def _grid_edges(n1: int, n2: int):
    """Edge endpoints and grid displacement, in row-major scan order."""
    ii, jj = np.meshgrid(np.arange(n1), np.arange(n2), indexing="ij")
    scan = ii * n2 + jj  # row-major scan position of the source pixel
    parts = []
    for d, (di, dj) in enumerate(NEIGHBOR_OFFSETS):
        ti, tj = ii + di, jj + dj
        ok = (ti >= 0) & (ti < n1) & (tj >= 0) & (tj < n2)
        src = jj[ok] * n1 + ii[ok]
        dst = tj[ok] * n1 + ti[ok]
        order_key = scan[ok] * len(NEIGHBOR_OFFSETS) + d
        dist = np.full(src.size, np.hypot(di, dj))
        parts.append((order_key, src, dst, dist))
    key, src, dst, dist = (np.concatenate(c) for c in zip(*parts))
    order = np.argsort(key, kind="stable")
    src, dst, dist = src[order], dst[order], dist[order]
    return np.minimum(src, dst), np.maximum(src, dst), dist


def build_graph(guide: GuideImage, params: GraphParams | None = None) -> SpatialGraph:
    """Connect every pixel to its 8 neighbours with bilateral weights.

    The weight of edge ``(p, q)`` is
    ``exp(-|l_p - l_q| / sigma_l) * exp(-|x_p - x_q| / sigma_x)`` where
    ``l`` is the grid coordinate and ``x`` the guide intensity.

    Edges are enumerated by scanning pixels row by row and, for each pixel,
    visiting the E, S, SE and SW neighbours that exist.
    """
    params = GraphParams() if params is None else params
    heads, tails, dist = _grid_edges(guide.n1, guide.n2)
    x = guide.data
    weights = np.exp(-dist / params.sigma_l) * np.exp(-np.abs(x[tails] - x[heads]) / params.sigma_x)
    # Very dissimilar pixels can underflow to 0; keep the weight positive.
    weights = np.maximum(weights, np.finfo(np.float64).tiny)
    return SpatialGraph(guide.n1, guide.n2, heads, tails, weights)


def incidence_pattern(graph: SpatialGraph):
    """Unweighted incidence matrix ``D`` as a sparse CSR matrix.

    Row ``e`` has ``-1`` at column ``p`` and ``+1`` at column ``q``.
    Intended for inspection and tests; the solver never forms it.
    """
    from scipy import sparse

    m = graph.num_edges
    rows = np.repeat(np.arange(m), 2)
    cols = np.column_stack([graph.heads, graph.tails]).reshape(-1)
    vals = np.tile([-1.0, 1.0], m)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(m, graph.num_pixels))


def laplacian(graph: SpatialGraph, weighted: bool = False):
    """Graph Laplacian ``D^T D`` (or ``D^T W^2 D`` when ``weighted``)."""
    from scipy import sparse

    d = incidence_pattern(graph)
    if weighted:
        d = sparse.diags(graph.weights) @ d
    return (d.T @ d).tocsr()
