"""Denoising benchmark and graph-parameter sweeps on simulated noise."""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields, replace

from .core import HsiCube
from .graph import GraphParams
from .metrics import mpsnr, mssim
from .noise import NoiseSpec, corrupt, oracle_radii
from .prox import BoxBounds
from .solver import ProblemSpec, Regularizer, SolverConfig, solve

__all__ = [
    "MetricsRow",
    "SweepRow",
    "run_benchmark",
    "run_sweep",
    "rows_to_csv",
    "shipped_instance",
    "SWEEP_PARAMS",
    "SHIPPED_DIMS",
    "SHIPPED_NOISE",
]

SWEEP_PARAMS = {"sigma-l": "sigma_l", "sigma-x": "sigma_x"}

# Reference instance used by the regression and acceptance tests.
SHIPPED_DIMS = (16, 16, 8)
SHIPPED_NOISE = NoiseSpec(gaussian_sigma=0.05, sp_rate=0.05, seed=0)


def shipped_instance(kind: str = "blocks", dims=SHIPPED_DIMS, noise: NoiseSpec = SHIPPED_NOISE, seed: int = 0):
    """``(clean, v, n, s_bar)`` for the seeded reference problem."""
    from .synth import synth_cube

    clean = synth_cube(kind, dims, seed=seed)
    v, n, s_bar = corrupt(clean, noise)
    return clean, v, n, s_bar


@dataclass
class MetricsRow:
    regularizer: str
    sigma: float
    sp_rate: float
    seed: int
    mpsnr_db: float
    mssim: float
    iterations: int
    seconds: float
    converged: bool


@dataclass
class SweepRow:
    param: str
    value: float
    regularizer: str
    sigma: float
    sp_rate: float
    seed: int
    mpsnr_db: float
    mssim: float
    iterations: int
    seconds: float
    converged: bool


def rows_to_csv(rows, row_type, timing: bool = False) -> str:
    """CSV with a header row. Wall time is left out unless ``timing`` is set,
    so that repeated runs give byte-identical output."""
    names = [f.name for f in fields(row_type) if timing or f.name != "seconds"]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names)
    for row in rows:
        d = asdict(row)
        writer.writerow([_fmt(d[k]) for k in names])
    return buf.getvalue()


def _fmt(x):
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return repr(x) if x == x and abs(x) != float("inf") else str(x)
    return str(x)


def _score(clean, noise, spec, config, warm_start=None):
    t0 = time.perf_counter()
    u, _, report = solve(spec, config, warm_start=warm_start)
    seconds = time.perf_counter() - t0
    metrics = dict(
        sigma=noise.gaussian_sigma,
        sp_rate=noise.sp_rate,
        seed=noise.seed,
        mpsnr_db=mpsnr(u, clean),
        mssim=mssim(u, clean),
        iterations=report.iterations,
        seconds=seconds,
        converged=report.converged,
    )
    return metrics, report


def run_benchmark(
    clean: HsiCube,
    noise: NoiseSpec,
    regularizers=tuple(Regularizer),
    graph_params: GraphParams | None = None,
    bounds: BoxBounds | None = None,
    config: SolverConfig | None = None,
) -> list[MetricsRow]:
    """Corrupt ``clean`` once, then solve with every regularizer at oracle radii."""
    v, n, s_bar = corrupt(clean, noise)
    eps, eta = oracle_radii(n, s_bar)
    rows = []
    for reg in regularizers:
        spec = ProblemSpec(
            v, eps, eta,
            bounds=bounds or BoxBounds(),
            regularizer=Regularizer(reg),
            graph_params=graph_params or GraphParams(),
        )
        metrics, _ = _score(clean, noise, spec, config)
        rows.append(MetricsRow(regularizer=Regularizer(reg).value, **metrics))
    return rows


def run_sweep(
    clean: HsiCube,
    noise: NoiseSpec,
    param: str,
    values,
    regularizer: Regularizer = Regularizer.GSSTV,
    graph_params: GraphParams | None = None,
    bounds: BoxBounds | None = None,
    config: SolverConfig | None = None,
    jobs: int = 1,
    warm_start: bool = False,
) -> list[SweepRow]:
    """Re-solve one noisy instance for each value of ``sigma-l`` or ``sigma-x``.

    The other graph parameter stays at its value in ``graph_params``. Rows
    come back sorted by the swept value. With ``warm_start`` the solves run
    in ascending order, each starting from the previous primal-dual state.
    """
    if param not in SWEEP_PARAMS:
        raise ValueError(f"param must be one of {sorted(SWEEP_PARAMS)}, got {param!r}")
    values = sorted(float(x) for x in values)
    if not values:
        raise ValueError("no sweep values given")
    base = graph_params or GraphParams()
    v, n, s_bar = corrupt(clean, noise)
    eps, eta = oracle_radii(n, s_bar)

    def spec_for(value):
        return ProblemSpec(
            v, eps, eta,
            bounds=bounds or BoxBounds(),
            regularizer=Regularizer(regularizer),
            graph_params=replace(base, **{SWEEP_PARAMS[param]: value}),
        )

    def row(value, metrics):
        return SweepRow(param=param, value=value, regularizer=Regularizer(regularizer).value, **metrics)

    if warm_start:
        rows, state = [], None
        for value in values:
            metrics, report = _score(clean, noise, spec_for(value), config, warm_start=state)
            state = report.state
            rows.append(row(value, metrics))
        return rows

    def one(value):
        return row(value, _score(clean, noise, spec_for(value), config)[0])

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, values))
    return [one(value) for value in values]
