"""Batch command line: simulate, fit, select, path, cv, stability, bench.

Exit status is 0 on success, 1 for bad input or flags, 2 for numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import bench as benchmod
from .core import SupportBounds, ValidationError, validate_quantile_matrix
from .csvio import ParseError, default_header, read_matrix_csv, write_matrix_csv, write_rows_csv
from .datagen import generate_zinbinom_qf
from .frechet import fit_frechet
from .friso import DescentConfig, solution_path, solve_friso
from .resampling import kfold_cv, stability_selection


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_bound(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "+inf", "infinity"):
        return math.inf
    if t in ("-inf", "-infinity"):
        return -math.inf
    try:
        v = float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number or +/-inf: {text!r}") from None
    if math.isnan(v):
        raise argparse.ArgumentTypeError("bound must not be NaN")
    return v


def parse_tau_grid(text: str) -> np.ndarray:
    """``start:stop:step`` (stop inclusive) or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            grid = np.round(start + step * np.arange(count), 12)
        else:
            grid = np.array([float(x) for x in text.split(",") if x.strip()])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad tau grid {text!r}; use start:stop:step or a comma list") from None
    if grid.size == 0 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise argparse.ArgumentTypeError("tau grid must be positive and strictly increasing")
    return grid


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer: {text!r}")
    return v


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1, help="worker threads (default: all cores)")
    common.add_argument("--verbose", action="store_true", help="emit JSON-line diagnostics on stderr")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--x", required=True, help="covariate CSV (n x p, header row)")
    data.add_argument("--y", required=True, help="quantile-function CSV (n x m, header row)")
    data.add_argument("--lower", type=parse_bound, default=-math.inf, help="lower support bound (number or -inf)")
    data.add_argument("--upper", type=parse_bound, default=math.inf, help="upper support bound (number or inf)")

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--epsilon", type=_positive_float, default=1e-6, help="tangent-gradient tolerance")
    solver.add_argument("--impulse", type=float, default=0.0, help="momentum coefficient in [0, 1)")
    solver.add_argument("--max-iter", type=_positive_int, default=500, help="iteration cap per tau")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--tau-grid", type=parse_tau_grid, default=parse_tau_grid("0.5:10:0.5"), help="start:stop:step or comma list (default 0.5:10:0.5)")

    p = _Parser(prog="wfrechet", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", parents=[common], help="simulate zinbinom quantile-function data")
    s.add_argument("--n", type=_positive_int, default=100, help="subjects")
    s.add_argument("--m", type=_positive_int, default=100, help="grid size")
    s.add_argument("--p", type=_positive_int, default=10, help="covariates (>= 4)")
    s.add_argument("--seed", type=int, default=1, help="random seed")
    s.add_argument("--out-x", required=True, help="covariate CSV to write")
    s.add_argument("--out-y", required=True, help="quantile CSV to write")

    s = sub.add_parser("fit", parents=[common, data], help="Fréchet regression fit")
    s.add_argument("--out", required=True, help="fitted quantile CSV to write")
    s.add_argument("--dump-active-sets", metavar="PATH", help="write final working sets as JSON arrays, one per line")

    s = sub.add_parser("select", parents=[common, data, solver], help="variable-selection weights at one tau")
    s.add_argument("--tau", type=_positive_float, required=True, help="simplex total")
    s.add_argument("--out", help="JSON output (default stdout)")

    s = sub.add_parser("path", parents=[common, data, solver, grid], help="selection weights along a tau grid")
    s.add_argument("--out", required=True, help="long CSV: variable, tau, lambda")
    s.add_argument("--out-wide", help="optional p x |grid| CSV, one column per tau")
    s.add_argument("--cold", action="store_true", help="restart every tau from the uniform point")

    s = sub.add_parser("cv", parents=[common, data, solver, grid], help="K-fold cross-validation over tau")
    s.add_argument("--folds", type=_positive_int, default=5, help="number of folds K")
    s.add_argument("--seed", type=int, default=0, help="fold-assignment seed")
    s.add_argument("--out", required=True, help="JSON report")
    s.add_argument("--out-csv", help="tidy CSV: tau, cv_error")

    s = sub.add_parser("stability", parents=[common, data, solver, grid], help="stability selection over half-samples")
    s.add_argument("--replicates", type=_positive_int, default=50, help="number of half-samples B")
    s.add_argument("--pi-threshold", type=float, default=0.9, help="selection-frequency threshold in (0.5, 1]")
    s.add_argument("--selection-cutoff", type=float, default=0.01, help="select when lambda_j > cutoff * tau / p")
    s.add_argument("--seed", type=int, default=0, help="replicate seed")
    s.add_argument("--out", required=True, help="JSON report")
    s.add_argument("--out-csv", help="tidy CSV: variable, tau, proportion")

    s = sub.add_parser("bench", parents=[common, solver], help="median timings on simulated data")
    s.add_argument("--task", choices=["fit", "select", "path"], default="fit", help="what to time")
    s.add_argument("--reps", type=_positive_int, default=15, help="timed repetitions")
    s.add_argument("--n", type=_positive_int, default=100, help="subjects")
    s.add_argument("--m", type=_positive_int, default=100, help="grid size")
    s.add_argument("--p", type=_positive_int, default=10, help="covariates (>= 4)")
    s.add_argument("--seed", type=int, default=1, help="simulation seed")
    s.add_argument("--tau", type=_positive_float, default=5.0, help="tau for --task select")
    s.add_argument("--tau-grid", type=parse_tau_grid, default=parse_tau_grid("0.5:10:0.5"), help="grid for --task path")
    s.add_argument("--lower", type=parse_bound, default=0.0, help="lower support bound")
    s.add_argument("--upper", type=parse_bound, default=math.inf, help="upper support bound")
    s.add_argument("--out", help="JSON output (default stdout)")
    return p


def _load(args):
    X, xnames = read_matrix_csv(args.x, return_header=True)
    Y = read_matrix_csv(args.y)
    if X.shape[0] != Y.shape[0]:
        raise ValidationError(f"--x has {X.shape[0]} rows but --y has {Y.shape[0]}")
    validate_quantile_matrix(Y)
    return X, Y, xnames


def _bounds(args):
    try:
        return SupportBounds(args.lower, args.upper)
    except ValueError as e:
        raise UsageError(f"--lower/--upper: {e}") from None


def _config(args):
    try:
        return DescentConfig(epsilon=args.epsilon, impulse=args.impulse, max_iter=args.max_iter)
    except ValueError as e:
        flag = "--impulse" if "impulse" in str(e) else "--epsilon" if "epsilon" in str(e) else "--max-iter"
        raise UsageError(f"{flag}: {e}") from None


def _emit_json(obj, path):
    text = json.dumps(obj, indent=2) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _diag(args):
    if not args.verbose:
        return None
    return lambda rec: print(json.dumps(rec), file=sys.stderr)


def cmd_simulate(args):
    if args.p < 4:
        raise UsageError("--p must be at least 4")
    X, Y = generate_zinbinom_qf(args.n, args.m, args.p, args.seed)
    write_matrix_csv(args.out_x, X, default_header(args.p, "X"))
    write_matrix_csv(args.out_y, Y, default_header(args.m, "Q"))


def cmd_fit(args):
    X, Y, _ = _load(args)
    fit = fit_frechet(X, Y, _bounds(args))
    write_matrix_csv(args.out, fit.Qhat, default_header(Y.shape[1], "Q"))
    if args.dump_active_sets:
        with open(args.dump_active_sets, "w") as fh:
            for a in fit.active_sets:
                fh.write(a.to_json() + "\n")


def _result_dict(res, names):
    return {
        "tau": res.lam.tau,
        "variables": names,
        "lambda": res.lam.lam.tolist(),
        "objective": res.objective,
        "iterations": res.iterations,
        "converged": res.converged,
        "gradient_norm": res.gradient_norm,
    }


def cmd_select(args):
    X, Y, names = _load(args)
    res = solve_friso(X, Y, args.tau, _bounds(args), _config(args), callback=_diag(args))
    _emit_json(_result_dict(res, names), args.out)


def cmd_path(args):
    X, Y, names = _load(args)
    path = solution_path(X, Y, args.tau_grid, _bounds(args), _config(args), warm_start=not args.cold)
    rows = [("variable", "tau", "lambda")]
    for k, tau in enumerate(path.tau_grid):
        for j, name in enumerate(names):
            rows.append((name, float(tau), float(path.lambdas[j, k])))
    write_rows_csv(args.out, rows)
    if args.out_wide:
        write_matrix_csv(args.out_wide, path.lambdas, [format(float(t), "g") for t in path.tau_grid])
    if args.verbose:
        for tau, r in zip(path.tau_grid, path.results):
            print(json.dumps({"tau": float(tau), "objective": r.objective, "iterations": r.iterations, "converged": r.converged}), file=sys.stderr)


def cmd_cv(args):
    X, Y, _ = _load(args)
    rep = kfold_cv(X, Y, args.tau_grid, _bounds(args), args.folds, _config(args), args.seed, args.threads)
    _emit_json(rep.to_dict(), args.out)
    if args.out_csv:
        write_rows_csv(args.out_csv, rep.csv_rows())


def cmd_stability(args):
    X, Y, names = _load(args)
    rep = stability_selection(
        X, Y, args.tau_grid, _bounds(args), args.replicates, args.pi_threshold,
        args.selection_cutoff, _config(args), args.seed, args.threads,
    )
    d = rep.to_dict()
    d["selected_names"] = [names[j] for j in rep.selected]
    _emit_json(d, args.out)
    if args.out_csv:
        write_rows_csv(args.out_csv, rep.csv_rows(names))


def cmd_bench(args):
    if args.p < 4:
        raise UsageError("--p must be at least 4")
    X, Y = generate_zinbinom_qf(args.n, args.m, args.p, args.seed)
    bounds, config = _bounds(args), _config(args)
    tasks = {
        "fit": lambda: fit_frechet(X, Y, bounds).Qhat,
        "select": lambda: solve_friso(X, Y, args.tau, bounds, config).lam.lam,
        "path": lambda: solution_path(X, Y, args.tau_grid, bounds, config).lambdas,
    }
    params = {"n": args.n, "m": args.m, "p": args.p, "seed": args.seed, "epsilon": args.epsilon, "impulse": args.impulse}
    if args.task == "select":
        params["tau"] = args.tau
    if args.task == "path":
        params["tau_grid"] = args.tau_grid.tolist()
    rep = benchmod.measure(tasks[args.task], args.reps, args.task, params)
    _emit_json(rep.to_dict(), args.out)


COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "select": cmd_select,
    "path": cmd_path,
    "cv": cmd_cv,
    "stability": cmd_stability,
    "bench": cmd_bench,
}


def run(argv=None) -> int:
    from .core import SingularDesignError, SolverError

    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except SystemExit as e:
        return int(e.code or 0)
    try:
        COMMANDS[args.command](args)
    except (SolverError, SingularDesignError, np.linalg.LinAlgError, FloatingPointError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as e:
        print(f"error: {' '.join(str(e).split())}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
