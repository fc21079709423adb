"""Command-line interface: ``gsstv <subcommand> ...``.

Exit codes: 0 success, 1 solver did not converge (result still written),
2 bad arguments or unreadable input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from .core import band_mean
from .experiments import MetricsRow, SweepRow, rows_to_csv, run_benchmark, run_sweep
from .graph import GraphParams, build_graph
from .io import CubeFormatError, atomic_write, read_cube, write_cube
from .metrics import mpsnr, mssim
from .noise import NoiseSpec, corrupt, oracle_radii
from .prox import BoxBounds
from .solver import ConfigurationError, NumericalError, ProblemSpec, Regularizer, SolverConfig, solve
from .synth import SYNTH_KINDS, synth_cube

EXIT_OK, EXIT_NOT_CONVERGED, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # argparse already exits with status 2 on bad usage; keep that explicit.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_graph_args(p):
    p.add_argument("--sigma-l", type=float, default=GraphParams.sigma_l)
    p.add_argument("--sigma-x", type=float, default=GraphParams.sigma_x)


def _add_solver_args(p):
    p.add_argument("--regularizer", choices=[r.value for r in Regularizer], default="gsstv")
    p.add_argument("--mu-lo", type=float, default=0.0)
    p.add_argument("--mu-hi", type=float, default=1.0)
    _add_graph_args(p)
    p.add_argument("--gamma1", type=float, default=0.1)
    p.add_argument("--gamma2-mode", choices=["paper", "auto"], default="auto")
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--max-iter", type=int, default=20000)
    p.add_argument("--seed", type=int, default=0, help="seed for the step-size power iteration")


def _add_noise_args(p):
    p.add_argument("--sigma", type=float, default=0.05, help="Gaussian noise standard deviation")
    p.add_argument("--sp-rate", type=float, default=0.05, help="salt-and-pepper fraction")
    p.add_argument("--noise-seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gsstv", description="Graph spatio-spectral TV denoising of hyperspectral cubes.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("denoise", help="solve the constrained denoising problem")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--sparse-output", help="also write the estimated sparse component")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--oracle", help="file written by 'simulate --emit-oracle' (supplies epsilon, eta)")
    _add_solver_args(p)
    p.add_argument("--log", help="write per-iteration JSON lines here")
    p.add_argument("--verbose", action="store_true", help="stream per-iteration JSON lines to stderr")

    p = sub.add_parser("simulate", help="add mixed Gaussian + salt-and-pepper noise")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--sp-rate", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--emit-oracle", help="write the oracle epsilon and eta here")

    p = sub.add_parser("metrics", help="MPSNR and MSSIM of a cube against a reference")
    p.add_argument("--test", required=True)
    p.add_argument("--reference", required=True)

    p = sub.add_parser("synth", help="generate a synthetic ground-truth cube")
    p.add_argument("--kind", choices=SYNTH_KINDS, required=True)
    p.add_argument("--dims", type=int, nargs=3, metavar=("N1", "N2", "N3"), required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--regions", type=int)
    p.add_argument("--output", required=True)

    p = sub.add_parser("graph-dump", help="write the spatial graph of a cube as CSV")
    p.add_argument("--input", required=True)
    _add_graph_args(p)
    p.add_argument("--output", required=True)

    p = sub.add_parser("benchmark", help="compare regularizers on one simulated instance")
    p.add_argument("--clean", required=True)
    _add_noise_args(p)
    _add_solver_args(p)
    p.set_defaults(regularizer=None)
    p.add_argument("--timing", action="store_true", help="add a wall-time column")
    p.add_argument("--output", help="CSV path (default: stdout)")

    p = sub.add_parser("sweep", help="re-solve over a range of graph parameters")
    p.add_argument("--clean", required=True)
    p.add_argument("--param", choices=["sigma-l", "sigma-x"], required=True)
    p.add_argument("--values", type=float, nargs="+", required=True)
    _add_noise_args(p)
    _add_solver_args(p)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--warm-start", action="store_true")
    p.add_argument("--timing", action="store_true", help="add a wall-time column")
    p.add_argument("--output", help="CSV path (default: stdout)")
    return parser


def _read_oracle(path) -> tuple[float, float]:
    values = {}
    with open(path) as fh:
        for line in fh:
            if "=" in line:
                key, val = line.split("=", 1)
                values[key.strip()] = float(val)
    try:
        return values["epsilon"], values["eta"]
    except KeyError as exc:
        raise ValueError(f"{path}: missing {exc.args[0]}") from None


def _config(args, log=None) -> SolverConfig:
    return SolverConfig(
        gamma1=args.gamma1,
        gamma2_mode=args.gamma2_mode,
        max_iter=args.max_iter,
        tol=args.tol,
        seed=args.seed,
        log=log,
    )


def _emit_csv(text: str, path):
    if path:
        atomic_write(path, text)
    else:
        sys.stdout.write(text)


def cmd_denoise(args) -> int:
    if args.oracle:
        eps, eta = _read_oracle(args.oracle)
    else:
        eps, eta = args.epsilon, args.eta
    if args.epsilon is not None:
        eps = args.epsilon
    if args.eta is not None:
        eta = args.eta
    if eps is None or eta is None:
        raise ValueError("give --epsilon and --eta, or --oracle")

    v = read_cube(args.input)
    records = []

    def log(rec):
        records.append(rec)
        if args.verbose:
            print(json.dumps(rec), file=sys.stderr)

    spec = ProblemSpec(
        v, eps, eta,
        bounds=BoxBounds(args.mu_lo, args.mu_hi),
        regularizer=Regularizer(args.regularizer),
        graph_params=GraphParams(args.sigma_l, args.sigma_x),
    )
    u, s, report = solve(spec, _config(args, log if (args.log or args.verbose) else None))
    write_cube(u, args.output)
    if args.sparse_output:
        write_cube(s, args.sparse_output)
    if args.log:
        atomic_write(args.log, "".join(json.dumps(r) + "\n" for r in records))
    summary = {k: getattr(report, k) for k in
               ("converged", "iterations", "rel_change", "objective", "l2_residual", "epsilon",
                "l1_norm_s", "eta", "gamma1", "gamma2", "lambda_estimate")}
    print(json.dumps(summary), file=sys.stderr)
    if not report.converged:
        print("warning: maximum iterations reached before convergence", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_simulate(args) -> int:
    clean = read_cube(args.input)
    v, n, s_bar = corrupt(clean, NoiseSpec(args.sigma, args.sp_rate, args.seed))
    eps, eta = oracle_radii(n, s_bar)
    write_cube(v, args.output)
    if args.emit_oracle:
        atomic_write(args.emit_oracle, f"epsilon={eps!r}\neta={eta!r}\n")
    return EXIT_OK


def cmd_metrics(args) -> int:
    test, ref = read_cube(args.test), read_cube(args.reference)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["mpsnr_db", "mssim"])
    writer.writerow([repr(mpsnr(test, ref)), repr(mssim(test, ref))])
    sys.stdout.write(buf.getvalue())
    return EXIT_OK


def cmd_synth(args) -> int:
    write_cube(synth_cube(args.kind, args.dims, args.seed, args.regions), args.output)
    return EXIT_OK


def cmd_graph_dump(args) -> int:
    cube = read_cube(args.input)
    graph = build_graph(band_mean(cube), GraphParams(args.sigma_l, args.sigma_x))
    lines = ["p,q,weight\n"]
    lines += [f"{p},{q},{w!r}\n" for p, q, w in
              zip(graph.heads.tolist(), graph.tails.tolist(), graph.weights.tolist())]
    atomic_write(args.output, "".join(lines))
    return EXIT_OK


def _bench_common(args):
    clean = read_cube(args.clean)
    noise = NoiseSpec(args.sigma, args.sp_rate, args.noise_seed)
    return clean, noise, GraphParams(args.sigma_l, args.sigma_x), BoxBounds(args.mu_lo, args.mu_hi)


def cmd_benchmark(args) -> int:
    clean, noise, gp, bounds = _bench_common(args)
    regs = tuple(Regularizer) if args.regularizer is None else (Regularizer(args.regularizer),)
    rows = run_benchmark(clean, noise, regs, gp, bounds, _config(args))
    _emit_csv(rows_to_csv(rows, MetricsRow, args.timing), args.output)
    return EXIT_OK if all(r.converged for r in rows) else EXIT_NOT_CONVERGED


def cmd_sweep(args) -> int:
    clean, noise, gp, bounds = _bench_common(args)
    rows = run_sweep(
        clean, noise, args.param, args.values,
        regularizer=Regularizer(args.regularizer),
        graph_params=gp, bounds=bounds, config=_config(args),
        jobs=args.jobs, warm_start=args.warm_start,
    )
    _emit_csv(rows_to_csv(rows, SweepRow, args.timing), args.output)
    return EXIT_OK if all(r.converged for r in rows) else EXIT_NOT_CONVERGED


COMMANDS = {
    "denoise": cmd_denoise,
    "simulate": cmd_simulate,
    "metrics": cmd_metrics,
    "synth": cmd_synth,
    "graph-dump": cmd_graph_dump,
    "benchmark": cmd_benchmark,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (CubeFormatError, ConfigurationError, ValueError, OSError) as exc:
        print(f"gsstv {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"gsstv {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED


if __name__ == "__main__":
    sys.exit(main())
