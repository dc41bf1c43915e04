"""Time-to-tolerance table for the three algorithms at desk scale.

    python3 scripts/desk_benchmark.py --p-list 200,500,1000 --seeds 2 --out results/bench.csv

At p = 1000 the penalty defaults to (alpha, lambda) = (0.89, 0.01); smaller
problems use the density-calibrated rule from ``precmat.bench``.
"""

import argparse
import logging
from pathlib import Path

from precmat.bench import ALGORITHMS, rows_to_csv, run_bench


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--p-list", default="200,500,1000")
    ap.add_argument("--seeds", type=int, default=2)
    ap.add_argument("--target-tol", type=float, default=0.1)
    ap.add_argument("--out", default="results/bench.csv")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    rows = []
    for p in (int(v) for v in args.p_list.split(",")):
        kw = dict(alpha=0.89, lam=0.01) if p == 1000 else dict(alpha=0.9)
        rows += run_bench([p], range(args.seeds), ALGORITHMS, target_tol=args.target_tol, **kw)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(rows_to_csv(rows))

    print(f"{'p':>5} {'seed':>4} {'algorithm':>9} {'iters':>6} {'secs':>8} {'rel_err':>8}")
    for r in rows:
        print(f"{r.p:>5} {r.seed:>4} {r.algorithm:>9} {r.iterations:>6} {r.secs:>8.2f} {r.rel_error:>8.4f}")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
