"""Matrix-free difference operators on flat hyperspectral cubes.

Every operator maps flat float64 vectors to flat float64 vectors. Cube
inputs follow the layout of :mod:`gsstv.core`: reshaping to
``(n3, n2, n1)`` gives ``[band, column, row]`` indexing, so

* ``diff_v`` (vertical, along rows ``i``) differences the last axis,
* ``diff_h`` (horizontal, along columns ``j``) differences axis 1,
* ``diff_b`` (spectral) differences axis 0.

All forward differences use a Neumann boundary: the trailing entry along
the differenced axis is zero.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .graph import SpatialGraph

__all__ = [
    "LinearOperator",
    "identity",
    "diff_h",
    "diff_v",
    "diff_b",
    "weighted_graph_diff",
    "block_graph_diff",
    "gsstv_operator",
    "sstv_operator",
    "gtv_operator",
    "stacked_problem_operator",
    "operator_norm_sq_estimate",
    "to_dense",
    "POWER_ITER_SAFETY",
]

POWER_ITER_SAFETY = 1.05


class LinearOperator:
    """A linear map ``R^in_dim -> R^out_dim`` given by forward and adjoint callables."""

    def __init__(
        self,
        in_dim: int,
        out_dim: int,
        apply: Callable[[np.ndarray], np.ndarray],
        adjoint_apply: Callable[[np.ndarray], np.ndarray],
        name: str = "op",
    ):
        self.in_dim = int(in_dim)
        self.out_dim = int(out_dim)
        self._apply = apply
        self._adjoint = adjoint_apply
        self.name = name

    @property
    def shape(self) -> tuple[int, int]:
        return (self.out_dim, self.in_dim)

    def apply(self, x) -> np.ndarray:
        x = self._check(x, self.in_dim, "input")
        return self._apply(x)

    def adjoint_apply(self, y) -> np.ndarray:
        y = self._check(y, self.out_dim, "adjoint input")
        return self._adjoint(y)

    __call__ = apply

    @property
    def T(self) -> "LinearOperator":
        return LinearOperator(self.out_dim, self.in_dim, self._adjoint, self._apply, f"{self.name}^T")

    def __matmul__(self, other):
        if isinstance(other, LinearOperator):
            return compose(self, other)
        return self.apply(other)

    def _check(self, x, dim, what):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1 or x.size != dim:
            raise ValueError(f"{self.name}: {what} has shape {x.shape}, expected ({dim},)")
        return x

    def __repr__(self):
        return f"LinearOperator({self.name}, shape={self.shape})"


def compose(outer: LinearOperator, inner: LinearOperator) -> LinearOperator:
    """``outer @ inner``; the adjoint runs the adjoints in reverse order."""
    if outer.in_dim != inner.out_dim:
        raise ValueError(f"cannot compose {outer.name} {outer.shape} with {inner.name} {inner.shape}")
    return LinearOperator(
        inner.in_dim,
        outer.out_dim,
        lambda x: outer._apply(inner._apply(x)),
        lambda y: inner._adjoint(outer._adjoint(y)),
        f"{outer.name}*{inner.name}",
    )


def vstack(ops: list[LinearOperator], name: str = "stack") -> LinearOperator:
    """Stack operators sharing an input space; output blocks are concatenated."""
    in_dim = ops[0].in_dim
    if any(op.in_dim != in_dim for op in ops):
        raise ValueError("stacked operators must share an input dimension")
    splits = np.cumsum([op.out_dim for op in ops])[:-1]

    def fwd(x):
        return np.concatenate([op._apply(x) for op in ops])

    def adj(y):
        parts = np.split(y, splits)
        out = ops[0]._adjoint(parts[0])
        for op, part in zip(ops[1:], parts[1:]):
            out = out + op._adjoint(part)
        return out

    return LinearOperator(in_dim, int(sum(op.out_dim for op in ops)), fwd, adj, name)


def identity(n: int) -> LinearOperator:
    return LinearOperator(n, n, lambda x: x.copy(), lambda y: y.copy(), "I")


def _dims(dims) -> tuple[int, int, int]:
    n1, n2, n3 = (int(d) for d in dims)
    if min(n1, n2, n3) < 1:
        raise ValueError(f"invalid dims {dims!r}")
    return n1, n2, n3


def _axis_diff(dims, axis: int, name: str) -> LinearOperator:
    n1, n2, n3 = _dims(dims)
    shape = (n3, n2, n1)
    n = n1 * n2 * n3
    lo = [slice(None)] * 3
    hi = [slice(None)] * 3
    lo[axis] = slice(None, -1)
    hi[axis] = slice(1, None)
    lo, hi = tuple(lo), tuple(hi)

    def fwd(x):
        x = x.reshape(shape)
        out = np.zeros(shape)
        out[lo] = x[hi] - x[lo]
        return out.reshape(-1)

    def adj(y):
        # Adjoint of a Neumann forward difference: -y[k-1] + ... with the
        # trailing entry of y ignored.
        y = y.reshape(shape)
        out = np.zeros(shape)
        out[hi] += y[lo]
        out[lo] -= y[lo]
        return out.reshape(-1)

    return LinearOperator(n, n, fwd, adj, name)


def diff_v(dims) -> LinearOperator:
    """Vertical forward difference (down the rows)."""
    return _axis_diff(dims, 2, "Dv")


def diff_h(dims) -> LinearOperator:
    """Horizontal forward difference (across the columns)."""
    return _axis_diff(dims, 1, "Dh")


def diff_b(dims) -> LinearOperator:
    """Spectral forward difference (across the bands)."""
    return _axis_diff(dims, 0, "Db")


def _band_graph_diff(graph: SpatialGraph, n3: int, name: str) -> LinearOperator:
    npix, m = graph.num_pixels, graph.num_edges
    p, q, w = graph.heads, graph.tails, graph.weights
    # Scatter indices for the adjoint, offset per band so one bincount covers the cube.
    offsets = (np.arange(n3) * npix)[:, None]
    scatter_idx = np.concatenate([(q + offsets).reshape(-1), (p + offsets).reshape(-1)])

    def fwd(x):
        x = x.reshape(n3, npix)
        return (w * (x[:, q] - x[:, p])).reshape(-1)

    def adj(y):
        yw = (y.reshape(n3, m) * w).reshape(-1)
        return np.bincount(scatter_idx, weights=np.concatenate([yw, -yw]), minlength=n3 * npix)

    return LinearOperator(npix * n3, m * n3, fwd, adj, name)


def weighted_graph_diff(graph: SpatialGraph) -> LinearOperator:
    """``W D`` on a single ``n1*n2`` image: ``(WDx)_e = w_e (x_q - x_p)``."""
    return _band_graph_diff(graph, 1, "WD")


def block_graph_diff(graph: SpatialGraph, n3: int) -> LinearOperator:
    """Block-diagonal ``diag(WD, ..., WD)`` applied band by band."""
    if int(n3) < 1:
        raise ValueError("n3 must be >= 1")
    return _band_graph_diff(graph, int(n3), "DG")


def _check_graph(graph: SpatialGraph, dims):
    n1, n2, n3 = _dims(dims)
    if (graph.n1, graph.n2) != (n1, n2):
        raise ValueError(f"graph grid {graph.n1}x{graph.n2} does not match cube {n1}x{n2}")
    return n1, n2, n3


def gsstv_operator(graph: SpatialGraph, dims) -> LinearOperator:
    """Graph-weighted spatial difference of the spectral difference, ``D_G D_b``."""
    _, _, n3 = _check_graph(graph, dims)
    op = compose(block_graph_diff(graph, n3), diff_b(dims))
    op.name = "gsstv"
    return op


def sstv_operator(dims) -> LinearOperator:
    """``[D_v D_b; D_h D_b]``; its l1 norm is the SSTV value."""
    db = diff_b(dims)
    return vstack([compose(diff_v(dims), db), compose(diff_h(dims), db)], "sstv")


def gtv_operator(graph: SpatialGraph, dims) -> LinearOperator:
    """Per-band graph difference without spectral differencing."""
    _, _, n3 = _check_graph(graph, dims)
    op = block_graph_diff(graph, n3)
    op.name = "gtv"
    return op


def stacked_problem_operator(reg_op: LinearOperator) -> LinearOperator:
    """``A = [[R, 0], [I, I]]`` acting on the stacked primal ``x = (u, s)``."""
    n, m = reg_op.in_dim, reg_op.out_dim

    def fwd(x):
        u, s = x[:n], x[n:]
        return np.concatenate([reg_op._apply(u), u + s])

    def adj(y):
        y1, y2 = y[:m], y[m:]
        return np.concatenate([reg_op._adjoint(y1) + y2, y2])

    return LinearOperator(2 * n, m + n, fwd, adj, f"A[{reg_op.name}]")


def operator_norm_sq_estimate(
    op: LinearOperator,
    iters: int = 100,
    tol: float = 1e-6,
    seed: int = 0,
    safety: float = POWER_ITER_SAFETY,
) -> float:
    """Power-iteration estimate of the largest eigenvalue of ``op^T op``.

    The Rayleigh quotient after at most ``iters`` steps (or once its relative
    change drops under ``tol``) is multiplied by ``safety`` so that it can be
    used directly as an upper bound in step-size rules. The start vector is
    drawn from a seeded generator, so the result is deterministic.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    rng = np.random.default_rng(seed)
    x = 1.0 + rng.standard_normal(op.in_dim)
    nrm = np.linalg.norm(x)
    if nrm == 0:
        return 0.0
    x /= nrm
    lam = 0.0
    for _ in range(iters):
        z = op._adjoint(op._apply(x))
        lam_new = float(x @ z)
        nz = np.linalg.norm(z)
        if nz == 0:
            return 0.0
        x = z / nz
        if lam_new > 0 and abs(lam_new - lam) < tol * lam_new:
            lam = lam_new
            break
        lam = lam_new
    return lam * safety


def to_dense(op: LinearOperator) -> np.ndarray:
    """Materialize ``op`` column by column (test and debugging helper)."""
    eye = np.eye(op.in_dim)
    return np.column_stack([op._apply(eye[:, c]) for c in range(op.in_dim)]).reshape(op.out_dim, op.in_dim)
