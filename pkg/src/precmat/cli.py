"""Command-line front end: ``precmat {solve,ridge,split,simulate,bench}``.

Exit codes: 0 success, 1 solver failure or non-convergence, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import data
from .bench import ALGORITHMS, rows_to_csv, run_bench
from .det import DetSolverConfig, solve_deterministic
from .errors import (
    DimensionMismatch,
    MaxRestartsExceeded,
    NonFiniteObjective,
    NotPositiveDefinite,
    NotSymmetric,
    ParseError,
    PrecmatError,
)
from .penalty import ElasticNetPenalty
from .ridge import solve_ridge_exact, solve_ridge_from_data
from .stochastic import AveragingSchedule, BatchSchedule, StochConfig, solve_averaged, solve_stochastic
from .threshold import solve_blockwise, threshold_components

EXIT_OK, EXIT_SOLVER, EXIT_INPUT = 0, 1, 2

INPUT_ERRORS = (ParseError, DimensionMismatch, NotSymmetric, OSError, ValueError)


def _add_input(p: argparse.ArgumentParser, kinds=("cov", "data")):
    p.add_argument("--input", required=True, help="matrix file (CSV or PMAT1 binary)")
    p.add_argument("--format", choices=["csv", "binary"], help="input format (default: from extension)")
    p.add_argument("--kind", choices=kinds, default=kinds[0], help="covariance matrix S or raw data X (rows = samples)")
    p.add_argument("--header", action="store_true", help="skip one header line in CSV input")
    p.add_argument("--center", action="store_true", help="subtract column means when forming S from data")


def _load_cov(args):
    if args.kind == "data":
        x = data.read_matrix(args.input, args.format, kind="data", header=args.header)
        return data.sample_covariance(x, center=args.center)
    return data.read_matrix(args.input, args.format, kind="covariance", header=args.header)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="precmat", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="elastic-net precision matrix by proximal gradient")
    _add_input(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True, help="overall penalty level (> 0)")
    p.add_argument("--alpha", type=float, required=True, help="l1 share of the penalty, in [0, 1]")
    p.add_argument("--algorithm", choices=ALGORITHMS, default="det", help="det: exact inverse; stoch: growing batches; averaged: recycled samples")
    p.add_argument("--gamma0", type=float, default=None, help="initial step (default 10; shrunk on restart)")
    p.add_argument("--step-shrink", type=float, default=0.5, help="step multiplier applied at each restart")
    p.add_argument("--max-restarts", type=int, default=60)
    p.add_argument("--batch-base", type=float, default=30, help="stoch: N_k = ceil(base + k^q)")
    p.add_argument("--batch-q", type=float, default=1.8, help="stoch: batch growth exponent q > 1")
    p.add_argument("--fixed-n", type=int, default=400, help="averaged: samples per iteration")
    p.add_argument("--zeta-decay", type=float, default=0.7, help="averaged: zeta_k = c k^-decay, decay in (0.5, 1]")
    p.add_argument("--zeta-coef", type=float, default=1.0, help="averaged: coefficient c")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=None, help="default: det 10000, stoch 300, averaged 500")
    p.add_argument("--tol", type=float, default=None, help="relative-change tolerance (default: det 1e-8, stochastic 1e-4)")
    p.add_argument("--split", action="store_true", help="solve thresholded connected components separately")
    p.add_argument("--trace", help="write per-iteration trace (CSV, or JSON lines for .jsonl)")
    p.add_argument("--output", help="write the estimated precision matrix here")
    p.add_argument("--reference", help="reference precision matrix for the rel_error trace column")
    p.add_argument("--guaranteed", action="store_true", help="det only: step ell_star^2 and clipped start (no restarts)")

    p = sub.add_parser("ridge", help="closed-form solution for alpha = 0")
    _add_input(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--output", help="write the precision matrix here")

    p = sub.add_parser("split", help="connected components of the thresholded covariance graph")
    _add_input(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--output", help="write the JSON partition here (default: stdout)")

    p = sub.add_parser("simulate", help="synthetic sparse precision problem")
    p.add_argument("--p", type=int, required=True, help="dimension")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--density", type=float, default=None, help="off-diagonal nonzero proportion (default 10/p)")
    p.add_argument("--magnitude", type=float, default=4.0, help="shift applied to nonzero entries")
    p.add_argument("--ell", type=float, default=1.0, help="smallest eigenvalue of the true precision")
    p.add_argument("--n", type=int, default=None, help="number of samples (default ceil(p/2))")
    p.add_argument("--out-dir", default=".", help="directory for theta_star, X and S files")
    p.add_argument("--format", choices=["csv", "binary"], default="csv")

    p = sub.add_parser("bench", help="time-to-tolerance table on synthetic problems")
    p.add_argument("--p-list", default="200", help="comma-separated dimensions")
    p.add_argument("--seeds", type=int, default=1, help="number of seeds per dimension (0..k-1)")
    p.add_argument("--algorithms", default=",".join(ALGORITHMS), help=f"comma-separated subset of {','.join(ALGORITHMS)}")
    p.add_argument("--target-tol", type=float, default=0.1, help="relative error to reach")
    p.add_argument("--alpha", type=float, default=0.9)
    p.add_argument("--lambda", dest="lam", type=float, default=None, help="fixed penalty (default 0.072*sqrt(log p / n))")
    p.add_argument("--tune", action="store_true", help="bisect lambda for 10/p solution density (slow for large p)")
    p.add_argument("--max-iters", type=int, default=None, help="iteration cap per algorithm")
    p.add_argument("--output", help="CSV path (default: stdout)")
    return parser


def _solver_config(args):
    if args.algorithm == "det":
        return DetSolverConfig(
            gamma0=None if args.guaranteed else (args.gamma0 or 10.0),
            step_shrink=args.step_shrink,
            max_restarts=args.max_restarts,
            max_iters=args.max_iters or 10_000,
            rel_tol=args.tol or 1e-8,
            guaranteed=args.guaranteed,
        )
    if args.guaranteed:
        raise ValueError("--guaranteed applies to the deterministic algorithm only")
    return StochConfig(
        gamma0=args.gamma0 or 10.0,
        step_shrink=args.step_shrink,
        max_restarts=args.max_restarts,
        max_iters=args.max_iters or (300 if args.algorithm == "stoch" else 500),
        rel_tol=args.tol or 1e-4,
        seed=args.seed,
        batch=BatchSchedule(args.batch_base, args.batch_q),
        fixed_n=args.fixed_n,
        averaging=AveragingSchedule(args.zeta_coef, args.zeta_decay),
    )


SOLVE = {"det": solve_deterministic, "stoch": solve_stochastic, "averaged": solve_averaged}


def run_solve(args) -> int:
    s = _load_cov(args)
    pen = ElasticNetPenalty(args.lam, args.alpha)
    pen.require_positive()
    cfg = _solver_config(args)
    reference = data.read_matrix(args.reference) if args.reference else None
    if reference is not None and reference.shape != s.shape:
        raise DimensionMismatch(f"reference has shape {reference.shape}, S has {s.shape}")
    if args.split:
        result = solve_blockwise(s, pen, args.algorithm, cfg)
        if reference is not None:
            _fill_rel_error_final(result, reference)
    else:
        result = SOLVE[args.algorithm](s, pen, cfg, reference=reference)
    if args.output:
        data.write_matrix(result.theta_hat, args.output)
    if args.trace:
        data.write_trace(result, args.trace)
    print(result.summary())
    return EXIT_OK if result.converged else EXIT_SOLVER


def _fill_rel_error_final(result, reference):
    # block traces cannot be compared with a full reference; only the final point can
    import numpy as np

    if result.trace:
        err = float(np.linalg.norm(result.theta_hat - reference) / np.linalg.norm(reference))
        result.trace[-1].rel_error = err


def run_ridge(args) -> int:
    if args.kind == "data":
        x = data.read_matrix(args.input, args.format, kind="data", header=args.header)
        if args.center:
            x = data.DatasetMatrix(x.values - x.values.mean(axis=0))
        sol = solve_ridge_from_data(x, args.lam)
    else:
        sol = solve_ridge_exact(_load_cov(args), args.lam)
    if args.output:
        data.write_matrix(sol.theta_hat, args.output)
    print(f"p={sol.theta_hat.shape[0]} lambda={args.lam:g} sigma_min={sol.sigma.min():.6g} sigma_max={sol.sigma.max():.6g}")
    return EXIT_OK


def run_split(args) -> int:
    s = _load_cov(args)
    pen = ElasticNetPenalty(args.lam, args.alpha)
    part = threshold_components(s, pen)
    payload = json.dumps({"alpha_lambda": pen.lambda1, "components": part.components})
    if args.output:
        data._atomic_write(args.output, (payload + "\n").encode())
    else:
        print(payload)
    return EXIT_OK


def run_simulate(args) -> int:
    prob = data.generate_synthetic(args.p, args.density, args.magnitude, args.ell, args.seed, n=args.n)
    out = Path(args.out_dir)
    ext = "csv" if args.format == "csv" else "bin"
    data.write_matrix(prob.theta_star, out / f"theta_star.{ext}", args.format)
    data.write_matrix(prob.x, out / f"X.{ext}", args.format)
    data.write_matrix(prob.s, out / f"S.{ext}", args.format)
    print(f"p={args.p} n={prob.x.n} seed={args.seed} density={prob.density:.4g} -> {out}")
    return EXIT_OK


def run_bench_cmd(args) -> int:
    p_list = [int(v) for v in args.p_list.split(",") if v.strip()]
    algorithms = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    unknown = set(algorithms) - set(ALGORITHMS)
    if unknown:
        raise ValueError(f"unknown algorithms: {sorted(unknown)}")
    rows = run_bench(
        p_list,
        range(args.seeds),
        algorithms,
        target_tol=args.target_tol,
        alpha=args.alpha,
        lam=args.lam,
        max_iters=args.max_iters,
        tune=args.tune,
    )
    table = rows_to_csv(rows)
    if args.output:
        data._atomic_write(args.output, table.encode())
    else:
        sys.stdout.write(table)
    return EXIT_OK


COMMANDS = {
    "solve": run_solve,
    "ridge": run_ridge,
    "split": run_split,
    "simulate": run_simulate,
    "bench": run_bench_cmd,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (MaxRestartsExceeded, NonFiniteObjective, NotPositiveDefinite) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except INPUT_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PrecmatError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
