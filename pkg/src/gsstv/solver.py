"""Primal-dual splitting solver for constrained TV-type HSI denoising.

Solves::

    minimize    ||R u||_1
    subject to  ||u + s - v||_2 <= epsilon
                ||s||_1 <= eta
                mu_lo <= u <= mu_hi

where ``R`` is one of the GSSTV, SSTV or GTV operators. The problem is cast
as ``min f1(x) + f2(A x)`` with ``x = (u, s)``,
``A = [[R, 0], [I, I]]``. ``f1`` holds the box and l1-ball indicators,
``f2`` the l1 norm and the l2-ball indicator; a primal-dual splitting
iteration solves it.
"""

from __future__ import annotations

import enum
import json
import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, TextIO

import numpy as np

from .core import HsiCube, band_mean
from .graph import GraphParams, SpatialGraph, build_graph
from .linops import (
    LinearOperator,
    gsstv_operator,
    gtv_operator,
    operator_norm_sq_estimate,
    sstv_operator,
    stacked_problem_operator,
)
from .prox import (
    BoxBounds,
    project_box,
    project_l1_ball,
    project_l2_ball,
    prox_conjugate,
    soft_threshold,
)

__all__ = [
    "Regularizer",
    "ProblemSpec",
    "SolverConfig",
    "SolverState",
    "Problem",
    "SolveReport",
    "SolveResult",
    "ConfigurationError",
    "NumericalError",
    "FIXED_GAMMA_CONSTANT",
    "assemble",
    "build_regularizer",
    "step_sizes",
    "initial_state",
    "pds_iterate",
    "solve",
]

FIXED_GAMMA_CONSTANT = 1800.0
AUTO_GAMMA_MARGIN = 0.99


class ConfigurationError(ValueError):
    """Inconsistent problem or solver settings."""


class NumericalError(ArithmeticError):
    """A NaN or Inf appeared in the iterates."""

    def __init__(self, iteration: int, what: str):
        super().__init__(f"non-finite value in {what} at iteration {iteration}")
        self.iteration = iteration


class Regularizer(str, enum.Enum):
    GSSTV = "gsstv"
    SSTV = "sstv"
    GTV = "gtv"

    @property
    def uses_graph(self) -> bool:
        return self is not Regularizer.SSTV


@dataclass(frozen=True)
class ProblemSpec:
    """Observation, constraint radii, box and regularizer choice.

    ``graph`` may carry a prebuilt spatial graph; otherwise one is built
    from the band mean of the observation with ``graph_params``.
    """

    observation: HsiCube
    epsilon: float
    eta: float
    bounds: BoxBounds = field(default_factory=BoxBounds)
    regularizer: Regularizer = Regularizer.GSSTV
    graph_params: GraphParams = field(default_factory=GraphParams)
    graph: SpatialGraph | None = None

    def __post_init__(self):
        object.__setattr__(self, "regularizer", Regularizer(self.regularizer))
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0):
            raise ConfigurationError(f"epsilon must be finite and >= 0, got {self.epsilon}")
        if not (math.isfinite(self.eta) and self.eta >= 0):
            raise ConfigurationError(f"eta must be finite and >= 0, got {self.eta}")


@dataclass(frozen=True)
class SolverConfig:
    gamma1: float = 0.1
    gamma2_mode: str = "auto"
    max_iter: int = 20000
    tol: float = 1e-4
    seed: int = 0
    # The first step only projects v onto the box (all duals start at 0), so
    # the stopping test is skipped until this many iterations have run.
    min_iter: int = 2
    # Convergence also requires ||u + s - v||_2 <= epsilon * (1 + feas_tol);
    # the relative-change test alone can stop outside the l2 ball. None
    # disables the check.
    feas_tol: float | None = 1e-4
    power_iters: int = 100
    log: TextIO | Callable[[dict], None] | None = None
    log_every: int = 1

    def __post_init__(self):
        if not self.gamma1 > 0:
            raise ConfigurationError("gamma1 must be positive")
        if self.gamma2_mode not in ("auto", "paper"):
            raise ConfigurationError(f"gamma2_mode must be 'auto' or 'paper', got {self.gamma2_mode!r}")
        if self.max_iter < 1:
            raise ConfigurationError("max_iter must be >= 1")
        if not self.tol > 0:
            raise ConfigurationError("tol must be positive")
        if self.feas_tol is not None and not self.feas_tol >= 0:
            raise ConfigurationError("feas_tol must be >= 0 or None")
        if self.log_every < 1:
            raise ConfigurationError("log_every must be >= 1")


@dataclass
class SolverState:
    """Primal ``(u, s)``, dual ``(y1, y2)`` and convergence history.

    ``rel_change_history`` is shared between successive states produced by
    :func:`pds_iterate`; it always has ``iter`` entries.
    """

    u: np.ndarray
    s: np.ndarray
    y1: np.ndarray
    y2: np.ndarray
    iter: int = 0
    rel_change_history: list[float] = field(default_factory=list)

    @property
    def rel_change(self) -> float:
        return self.rel_change_history[-1] if self.rel_change_history else math.inf


@dataclass(frozen=True, eq=False)
class Problem:
    """Assembled operators and proximity maps for one :class:`ProblemSpec`."""

    spec: ProblemSpec
    reg_op: LinearOperator
    A: LinearOperator
    prox_u: Callable[[np.ndarray], np.ndarray]
    prox_s: Callable[[np.ndarray], np.ndarray]
    prox_y1_conj: Callable[[np.ndarray, float], np.ndarray]
    prox_y2_conj: Callable[[np.ndarray, float], np.ndarray]
    graph: SpatialGraph | None = None

    @property
    def v(self) -> np.ndarray:
        return self.spec.observation.data


@dataclass
class SolveReport:
    converged: bool
    iterations: int
    rel_change: float
    l2_residual: float
    epsilon: float
    l1_norm_s: float
    eta: float
    objective: float
    box_violation: float
    gamma1: float
    gamma2: float
    lambda_estimate: float
    seconds: float
    state: SolverState | None = field(default=None, repr=False)


class SolveResult(NamedTuple):
    u: HsiCube
    s: HsiCube
    report: SolveReport


def build_regularizer(
    regularizer: Regularizer, dims, graph: SpatialGraph | None = None
) -> LinearOperator:
    regularizer = Regularizer(regularizer)
    if regularizer is Regularizer.SSTV:
        return sstv_operator(dims)
    if graph is None:
        raise ConfigurationError(f"{regularizer.value} needs a spatial graph")
    if (graph.n1, graph.n2) != tuple(dims[:2]):
        raise ConfigurationError("graph grid does not match the observation")
    if regularizer is Regularizer.GSSTV:
        return gsstv_operator(graph, dims)
    return gtv_operator(graph, dims)


def assemble(spec: ProblemSpec) -> Problem:
    """Wire the stacked operator and the four proximity maps for ``spec``."""
    v = spec.observation
    graph = spec.graph
    if spec.regularizer.uses_graph and graph is None:
        graph = build_graph(band_mean(v), spec.graph_params)
    try:
        reg_op = build_regularizer(spec.regularizer, v.dims, graph)
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc

    bounds, eps, eta = spec.bounds, float(spec.epsilon), float(spec.eta)
    center = v.data

    def prox_u(z):
        return project_box(z, bounds)

    if eta > 0:
        def prox_s(z):
            return project_l1_ball(z, eta)
    else:
        def prox_s(z):
            return np.zeros_like(z)

    def prox_y1_conj(z, gamma):
        return prox_conjugate(soft_threshold, gamma, z)

    def prox_y2_conj(z, gamma):
        # The prox of an indicator is the projection, whatever the index.
        return prox_conjugate(lambda x, _t: project_l2_ball(x, center, eps), gamma, z)

    return Problem(
        spec=spec,
        reg_op=reg_op,
        A=stacked_problem_operator(reg_op),
        prox_u=prox_u,
        prox_s=prox_s,
        prox_y1_conj=prox_y1_conj,
        prox_y2_conj=prox_y2_conj,
        graph=graph,
    )


def step_sizes(problem: Problem, config: SolverConfig) -> tuple[float, float, float]:
    """Return ``(gamma1, gamma2, lambda_estimate)`` after checking the PDS condition.

    ``lambda_estimate`` already includes the power-iteration safety factor.
    """
    lam = operator_norm_sq_estimate(problem.A, iters=config.power_iters, seed=config.seed)
    g1 = float(config.gamma1)
    if config.gamma2_mode == "paper":
        g2 = 1.0 / (FIXED_GAMMA_CONSTANT * g1)
    else:
        g2 = AUTO_GAMMA_MARGIN / (g1 * lam)
    if not g1 * g2 * lam < 1.0:
        raise ConfigurationError(
            f"step sizes violate gamma1*gamma2*lambda < 1: {g1}*{g2}*{lam} = {g1 * g2 * lam}"
        )
    return g1, g2, lam


def initial_state(problem: Problem) -> SolverState:
    """``u = v``, ``s = 0`` and zero duals."""
    v = problem.v
    return SolverState(
        u=v.copy(),
        s=np.zeros_like(v),
        y1=np.zeros(problem.reg_op.out_dim),
        y2=np.zeros_like(v),
    )


def _relative_change(new: np.ndarray, old: np.ndarray) -> float:
    den = np.linalg.norm(old)
    num = np.linalg.norm(new - old)
    return float(num / den) if den >= 1e-15 else float(num)


def pds_iterate(state: SolverState, problem: Problem, gamma1: float, gamma2: float) -> SolverState:
    """One PDS sweep: primal projections, then over-relaxed dual updates."""
    reg = problem.reg_op
    u, s, y1, y2 = state.u, state.s, state.y1, state.y2

    u_new = problem.prox_u(u - gamma1 * (reg._adjoint(y1) + y2))
    s_new = problem.prox_s(s - gamma1 * y2)

    u_bar = 2.0 * u_new - u
    s_bar = 2.0 * s_new - s
    y1_new = problem.prox_y1_conj(y1 + gamma2 * reg._apply(u_bar), gamma2)
    y2_new = problem.prox_y2_conj(y2 + gamma2 * (u_bar + s_bar), gamma2)

    it = state.iter + 1
    for name, arr in (("u", u_new), ("s", s_new), ("y1", y1_new), ("y2", y2_new)):
        if not np.all(np.isfinite(arr)):
            raise NumericalError(it, name)

    history = state.rel_change_history
    history.append(_relative_change(u_new, u))
    return replace(state, u=u_new, s=s_new, y1=y1_new, y2=y2_new, iter=it, rel_change_history=history)


def _l2_feasible(problem: Problem, state: SolverState, feas_tol: float) -> bool:
    v = problem.v
    slack = 1e-12 * max(1.0, float(np.linalg.norm(v)))
    eps = float(problem.spec.epsilon)
    return float(np.linalg.norm(state.u + state.s - v)) <= eps * (1.0 + feas_tol) + slack


def _diagnostics(problem: Problem, u: np.ndarray, s: np.ndarray) -> dict:
    b = problem.spec.bounds
    return {
        "objective": float(np.abs(problem.reg_op._apply(u)).sum()),
        "l2_residual": float(np.linalg.norm(u + s - problem.v)),
        "l1_norm_s": float(np.abs(s).sum()),
        "box_violation": float(max(b.mu_lo - u.min(), u.max() - b.mu_hi, 0.0)),
    }


def _emit(log, record: dict):
    if callable(log):
        log(record)
    else:
        log.write(json.dumps(record) + "\n")


def solve(
    spec: ProblemSpec,
    config: SolverConfig | None = None,
    warm_start: SolverState | None = None,
    problem: Problem | None = None,
) -> SolveResult:
    """Run PDS until the relative change of ``u`` drops below ``config.tol``
    and ``u + s`` lies in the l2 ball up to ``config.feas_tol``.

    Hitting ``max_iter`` first is not an error: the result comes back with
    ``report.converged = False``. ``warm_start`` resumes from a previous
    state (primal and dual), which is how parameter sweeps reuse work.
    """
    config = SolverConfig() if config is None else config
    problem = assemble(spec) if problem is None else problem
    g1, g2, lam = step_sizes(problem, config)

    if warm_start is None:
        state = initial_state(problem)
    else:
        ref = initial_state(problem)
        for name in ("u", "s", "y1", "y2"):
            if getattr(warm_start, name).shape != getattr(ref, name).shape:
                raise ConfigurationError(f"warm start {name} has the wrong shape")
        state = SolverState(
            warm_start.u.copy(), warm_start.s.copy(), warm_start.y1.copy(), warm_start.y2.copy()
        )

    t0 = time.perf_counter()
    converged = False
    while state.iter < config.max_iter:
        state = pds_iterate(state, problem, g1, g2)
        if config.log is not None and (state.iter % config.log_every == 0):
            _emit(config.log, {"iter": state.iter, "rel_change": state.rel_change,
                               **_diagnostics(problem, state.u, state.s)})
        if state.iter >= config.min_iter and state.rel_change < config.tol:
            if config.feas_tol is None or _l2_feasible(problem, state, config.feas_tol):
                converged = True
                break
    seconds = time.perf_counter() - t0

    diag = _diagnostics(problem, state.u, state.s)
    report = SolveReport(
        converged=converged,
        iterations=state.iter,
        rel_change=state.rel_change,
        epsilon=float(spec.epsilon),
        eta=float(spec.eta),
        gamma1=g1,
        gamma2=g2,
        lambda_estimate=lam,
        seconds=seconds,
        state=state,
        **diag,
    )
    v = spec.observation
    return SolveResult(v.with_data(state.u), v.with_data(state.s), report)
