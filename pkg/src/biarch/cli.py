"""Command-line interface.

Subcommands: ``fit`` (biarchetype fit), ``aa`` (row archetypes only),
``surface`` (RSS elbow sweep), ``baseline`` (hard double k-means) and
``simulate`` (reference data generators). Exit codes: 0 success, 1 usage
error, 2 data error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .datasets import planted_block_matrix, simulate_block_gaussian, toy_matrix
from .errors import BiarchError, MaxIterationsExceeded
from .io import (
    read_csv,
    write_assignments_csv,
    write_matrix_csv,
    write_model,
    write_surface_csv,
)
from .selection import DEFAULT_FLATTEN_THRESHOLD, rss_surface
from .solvers import fit_aa, fit_biaa, fit_double_kmeans, reconstruct
from .types import FitConfig, standardize


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the CLI contract wants 1
    def error(self, message):
        raise _UsageError(message)


def _add_io_options(p):
    p.add_argument("csv", help="input data CSV (UTF-8, decimal-point reals)")
    p.add_argument("--delimiter", default=",", help="field delimiter (default ,)")
    p.add_argument(
        "--no-header",
        action="store_true",
        help="treat the first line as data instead of column names",
    )


def _add_fit_options(p, with_c: bool):
    p.add_argument("--k", type=int, required=True, help="number of row archetypes")
    if with_c:
        p.add_argument(
            "--c", type=int, required=True, help="number of column archetypes"
        )
    p.add_argument(
        "--standardize",
        action="store_true",
        help="z-score columns first (population std); recommended for "
        "heterogeneous feature scales",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--penalty", type=float, default=200.0,
                   help="simplex penalty constant")
    p.add_argument("--tol", type=float, default=1e-6,
                   help="relative RSS improvement tolerance")
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--out", required=True, help="model document output path")
    p.add_argument("--emit-alpha", help="row membership CSV")
    p.add_argument("--emit-gamma", help="column membership CSV")
    p.add_argument("--emit-z", help="biarchetype matrix CSV")
    p.add_argument("--emit-recon", help="reconstruction CSV")
    p.add_argument("--threads", type=int, default=None,
                   help="restart/cell parallelism (default $BIARCH_THREADS or 1)")


def build_parser() -> _Parser:
    parser = _Parser(prog="biarch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit row and column archetypes")
    _add_io_options(fit)
    _add_fit_options(fit, with_c=True)
    fit.set_defaults(func=_cmd_fit)

    aa = sub.add_parser("aa", help="fit row archetypes only")
    _add_io_options(aa)
    _add_fit_options(aa, with_c=False)
    aa.set_defaults(func=_cmd_aa)

    surface = sub.add_parser("surface", help="RSS surface over a (k, c) grid")
    _add_io_options(surface)
    surface.add_argument("--k-min", type=int, required=True)
    surface.add_argument("--k-max", type=int, required=True)
    surface.add_argument("--c-min", type=int, required=True)
    surface.add_argument("--c-max", type=int, required=True)
    surface.add_argument("--threshold", type=float,
                         default=DEFAULT_FLATTEN_THRESHOLD,
                         help="flattening threshold for the elbow rule")
    surface.add_argument("--standardize", action="store_true")
    surface.add_argument("--seed", type=int, default=0)
    surface.add_argument("--restarts", type=int, default=5)
    surface.add_argument("--penalty", type=float, default=200.0)
    surface.add_argument("--tol", type=float, default=1e-6)
    surface.add_argument("--max-iter", type=int, default=500)
    surface.add_argument("--out", required=True, help="surface CSV output path")
    surface.add_argument("--threads", type=int, default=None)
    surface.set_defaults(func=_cmd_surface)

    baseline = sub.add_parser("baseline", help="hard double k-means")
    _add_io_options(baseline)
    baseline.add_argument("--k", type=int, required=True)
    baseline.add_argument("--c", type=int, required=True)
    baseline.add_argument("--standardize", action="store_true")
    baseline.add_argument("--seed", type=int, default=0)
    baseline.add_argument("--max-iter", type=int, default=100)
    baseline.add_argument("--out", required=True, help="assignments CSV path")
    baseline.set_defaults(func=_cmd_baseline)

    simulate = sub.add_parser("simulate", help="generate reference data")
    simulate.add_argument(
        "--preset", required=True, choices=["toy", "block-gaussian", "planted"]
    )
    simulate.add_argument("--n", type=int, default=None)
    simulate.add_argument("--m", type=int, default=None)
    simulate.add_argument("--k", type=int, default=2,
                          help="planted row groups (planted preset)")
    simulate.add_argument("--c", type=int, default=2,
                          help="planted column groups (planted preset)")
    simulate.add_argument("--rho", type=float, default=0.8,
                          help="within-block correlation (block-gaussian preset)")
    simulate.add_argument("--noise", type=float, default=0.05,
                          help="noise std (planted preset)")
    simulate.add_argument("--values", default="0,1,1,0",
                          help="row-major k*c block values (planted preset)")
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--out", required=True, help="data CSV output path")
    simulate.add_argument("--labels-out", help="planted labels CSV path")
    simulate.set_defaults(func=_cmd_simulate)

    return parser


def _resolve_threads(value) -> int:
    if value is not None:
        threads = value
    else:
        threads = int(os.environ.get("BIARCH_THREADS", "1"))
    if threads < 1:
        raise _UsageError("--threads must be >= 1")
    return threads


def _load(args):
    if len(args.delimiter) != 1:
        raise _UsageError("--delimiter must be a single character")
    data = read_csv(args.csv, has_header=not args.no_header,
                    delimiter=args.delimiter)
    if getattr(args, "standardize", False):
        data = standardize(data)
    return data


def _config(args, k: int, c: int) -> FitConfig:
    try:
        return FitConfig(
            k=k,
            c=c,
            penalty_c=args.penalty,
            max_iter=args.max_iter,
            rel_tol=args.tol,
            n_restarts=args.restarts,
            seed=args.seed,
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from None


def _feature_names(data, prefix="col"):
    if data.column_names is not None:
        return list(data.column_names)
    return [f"{prefix}_{j + 1}" for j in range(data.m)]


def _emit_model_csvs(args, data, model):
    arch_names = [f"arch_{g + 1}" for g in range(model.k)]
    col_arch_names = [f"col_arch_{h + 1}" for h in range(model.c)]
    if args.emit_alpha:
        write_matrix_csv(args.emit_alpha, model.alpha.values, arch_names)
    if args.emit_gamma:
        write_matrix_csv(args.emit_gamma, model.gamma.values, _feature_names(data))
    if args.emit_z:
        write_matrix_csv(args.emit_z, model.z, col_arch_names)
    if args.emit_recon:
        write_matrix_csv(args.emit_recon, reconstruct(model), _feature_names(data))


def _print_fit_summary(model):
    print(
        f"rss={model.rss:.6g} iterations={model.iterations} "
        f"converged={str(model.converged).lower()}"
    )


def _cmd_fit(args) -> int:
    data = _load(args)
    config = _config(args, args.k, args.c)
    model = fit_biaa(data, config, threads=_resolve_threads(args.threads))
    write_model(model, args.out)
    _emit_model_csvs(args, data, model)
    _print_fit_summary(model)
    return 0


def _cmd_aa(args) -> int:
    data = _load(args)
    config = _config(args, args.k, max(1, data.m))
    model = fit_aa(data, args.k, config, threads=_resolve_threads(args.threads))
    write_model(model, args.out)
    _emit_model_csvs(args, data, model)
    _print_fit_summary(model)
    return 0


def _cmd_surface(args) -> int:
    data = _load(args)
    config = _config(args, 1, 1)
    if not 0 < args.threshold < 1:
        raise _UsageError("--threshold must lie in (0, 1)")
    surface = rss_surface(
        data,
        (args.k_min, args.k_max),
        (args.c_min, args.c_max),
        config,
        flatten_threshold=args.threshold,
        threads=_resolve_threads(args.threads),
    )
    write_surface_csv(args.out, surface)
    if surface.suggested_k is not None:
        print(f"elbow k={surface.suggested_k} c={surface.suggested_c}")
    else:
        print("elbow none")
    return 0


def _cmd_baseline(args) -> int:
    data = _load(args)
    model = fit_double_kmeans(
        data, args.k, args.c, seed=args.seed, max_iter=args.max_iter
    )
    write_assignments_csv(args.out, model.row_assign, model.col_assign)
    print(f"rss={model.rss:.6g} iterations={model.iterations}")
    return 0


def _cmd_simulate(args) -> int:
    labels = None
    if args.preset == "toy":
        data = toy_matrix()
    elif args.preset == "block-gaussian":
        n = args.n if args.n is not None else 50
        m = args.m if args.m is not None else 50
        data, row_labels, col_labels = simulate_block_gaussian(
            n=n, m=m, rho=args.rho, seed=args.seed
        )
        labels = (row_labels, col_labels)
    else:  # planted
        n = args.n if args.n is not None else 30
        m = args.m if args.m is not None else 20
        try:
            flat = [float(v) for v in args.values.split(",")]
            block_values = np.array(flat).reshape(args.k, args.c)
        except ValueError:
            raise _UsageError(
                f"--values must hold {args.k}*{args.c} numbers, row-major"
            ) from None
        data, row_labels, col_labels = planted_block_matrix(
            n, m, args.k, args.c, block_values,
            noise_sigma=args.noise, seed=args.seed,
        )
        labels = (row_labels, col_labels)
    write_matrix_csv(args.out, data.values, _feature_names(data))
    if args.labels_out:
        if labels is None:
            raise _UsageError("the toy preset has no planted labels")
        write_assignments_csv(args.labels_out, labels[0], labels[1])
    return 0


def cli_main(argv=None) -> int:
    """Run the CLI on an argument list, mapping failures to exit codes."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version paths
        code = exc.code
        return int(code) if code is not None else 0
    except MaxIterationsExceeded as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    except (BiarchError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
