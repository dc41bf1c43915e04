"""Relative error against a tight reference, per iteration, for each algorithm.

    python3 scripts/convergence_trace.py --p 200 --seed 7 --out-dir results/traces

Writes one trace CSV per algorithm (columns as in ``precmat.data``), ready
for plotting error against ``elapsed_s`` or ``iter``.
"""

import argparse
from pathlib import Path

from precmat.bench import default_lambda
from precmat.data import generate_synthetic, write_trace
from precmat.det import DetSolverConfig, solve_deterministic
from precmat.penalty import ElasticNetPenalty
from precmat.stochastic import StochConfig, solve_averaged, solve_stochastic


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--p", type=int, default=200)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--alpha", type=float, default=0.9)
    ap.add_argument("--iters", type=int, default=200)
    ap.add_argument("--out-dir", default="results/traces")
    args = ap.parse_args()

    prob = generate_synthetic(args.p, seed=args.seed)
    pen = ElasticNetPenalty(default_lambda(args.p, prob.x.n), args.alpha)
    ref = solve_deterministic(prob.s, pen, DetSolverConfig(gamma0=10.0, rel_tol=1e-10)).theta_hat

    runs = {
        "det": solve_deterministic(prob.s, pen, DetSolverConfig(gamma0=10.0, max_iters=args.iters, rel_tol=1e-300), reference=ref),
        "stoch": solve_stochastic(prob.s, pen, StochConfig(seed=args.seed, max_iters=args.iters, rel_tol=1e-300), reference=ref),
        "averaged": solve_averaged(prob.s, pen, StochConfig(seed=args.seed, max_iters=args.iters, rel_tol=1e-300), reference=ref),
    }
    out = Path(args.out_dir)
    for name, res in runs.items():
        write_trace(res, out / f"{name}.csv")
        last = res.trace[-1]
        print(f"{name:>9}: iters={res.iterations} restarts={res.restarts} rel_err={last.rel_error:.3e} secs={res.elapsed_s:.2f}")
    print(f"lambda={pen.lam:.4g}; traces in {out}")


if __name__ == "__main__":
    main()
