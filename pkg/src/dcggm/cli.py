"""Command-line surface: generate, fit, experiment, plot.

Exit codes: 0 success, 1 usage or validation problem, 2 numerical failure.
Diagnostics go to stderr; data lands only in the requested output paths.
The DCGGM_THREADS environment variable overrides the configured
parallelism for experiment runs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import NumericalError, ValidationError
from .harness import (
    METHODS,
    RunConfig,
    fit_method,
    read_results_csv,
    run_benchmark,
    run_experiment1,
    run_experiment2,
    write_bench_csv,
    write_curves_csv,
    write_results_csv,
)
from .linalg import load_matrix_csv, save_matrix_csv
from .plot import PLOT_KINDS, render_plot
from .synthetic import KINDS, make_dataset, save_dataset

LOCK_NAME = ".dcggm.lock"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="dcggm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic dataset")
    gen.add_argument("--kind", required=True, choices=KINDS)
    gen.add_argument("--p", required=True, type=int)
    gen.add_argument("--n", required=True, type=int)
    gen.add_argument("--edges", required=True, type=int)
    gen.add_argument("--seed", required=True, type=int)
    gen.add_argument("--out", required=True)

    fit = sub.add_parser("fit", help="fit one estimator on a covariance CSV")
    fit.add_argument("--method", required=True, choices=METHODS)
    fit.add_argument("--input", required=True)
    fit.add_argument("--k", type=int, help="vec-cardinality for dc")
    fit.add_argument("--lambda", dest="lam", type=float,
                     help="penalty for glasso/scad/adapt")
    fit.add_argument("--a", type=float, default=3.7, help="SCAD shape")
    fit.add_argument("--gamma", type=float, default=0.5,
                     help="adaptive-lasso exponent")
    fit.add_argument("--out", required=True)

    exp = sub.add_parser("experiment", help="run an experiment config")
    exp.add_argument("--config", required=True)
    exp.add_argument("--mode", required=True, choices=("cv", "fixed", "bench"))
    exp.add_argument("--out", help="override config output_dir")

    plot = sub.add_parser("plot", help="render a results CSV as SVG")
    plot.add_argument("--results", required=True)
    plot.add_argument("--kind", required=True, choices=PLOT_KINDS)
    plot.add_argument("--out", required=True)
    return parser


def _cmd_generate(args) -> int:
    gt, ds = make_dataset(args.kind, args.p, args.n, args.edges, args.seed)
    save_dataset(args.out, gt, ds)
    return 0


def _cmd_fit(args) -> int:
    from .harness import MethodSettings

    s = load_matrix_csv(args.input)
    if args.method == "dc":
        if args.k is None:
            raise UsageError("--k is required for method dc")
        param = args.k
    else:
        if args.lam is None:
            raise UsageError(f"--lambda is required for method {args.method}")
        param = args.lam
    settings = MethodSettings(scad_a=args.a, adapt_gamma=args.gamma)
    omega, info = fit_method(args.method, s, param, settings)
    os.makedirs(args.out, exist_ok=True)
    save_matrix_csv(os.path.join(args.out, "omega.csv"), omega)
    payload = {
        "method": args.method,
        "param": param,
        "iterations": info["iterations"],
        "converged": bool(info["converged"]),
        "kkt_residual": info["kkt_residual"],
        "wall_seconds": info["seconds"],
    }
    if args.method == "dc":
        payload["constraint_gap"] = info["constraint_gap"]
    with open(os.path.join(args.out, "fit.json"), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


def _cmd_experiment(args) -> int:
    with open(args.config) as fh:
        raw = json.load(fh)
    try:
        config = RunConfig.from_dict(raw)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad config: {exc}") from exc
    if args.out:
        config.output_dir = args.out
    if not config.output_dir:
        raise UsageError("config must set output_dir (or pass --out)")
    env_threads = os.environ.get("DCGGM_THREADS")
    if env_threads:
        try:
            config.parallelism = int(env_threads)
        except ValueError as exc:
            raise UsageError(f"DCGGM_THREADS must be an integer: {env_threads!r}") from exc

    os.makedirs(config.output_dir, exist_ok=True)
    lock_path = os.path.join(config.output_dir, LOCK_NAME)
    try:
        lock_fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise UsageError(
            f"output dir {config.output_dir!r} is in use (lock file present); "
            "concurrent runs need distinct output dirs"
        ) from None
    try:
        if args.mode == "cv":
            rows, curves = run_experiment1(config)
            write_results_csv(os.path.join(config.output_dir, "results.csv"), rows)
            write_curves_csv(os.path.join(config.output_dir, "cv_curves.csv"),
                             curves)
            if rows and all("error" in r.extra for r in rows):
                raise NumericalError("every experiment cell failed")
        elif args.mode == "fixed":
            rows = run_experiment2(config)
            write_results_csv(os.path.join(config.output_dir, "results.csv"), rows)
            if rows and all("error" in r.extra for r in rows):
                raise NumericalError("every experiment cell failed")
        else:
            bench = run_benchmark(config)
            write_bench_csv(os.path.join(config.output_dir, "bench.csv"), bench)
    finally:
        os.close(lock_fd)
        os.unlink(lock_path)
    return 0


def _cmd_plot(args) -> int:
    try:
        rows = read_results_csv(args.results)
        render_plot(args.kind, rows, args.out)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "generate":
            return _cmd_generate(args)
        if args.command == "fit":
            return _cmd_fit(args)
        if args.command == "experiment":
            return _cmd_experiment(args)
        return _cmd_plot(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValidationError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
