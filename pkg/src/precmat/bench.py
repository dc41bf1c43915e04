"""Time-to-tolerance benchmark on synthetic problems.

For every ``(p, seed)`` a synthetic problem is generated, ``lambda`` is set
so the solution has roughly ``10/p`` off-diagonal density, a tight
deterministic solve provides the reference, and each algorithm is timed
until ``||theta_k - ref||_F / ||ref||_F <= target_tol``.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from .data import generate_synthetic
from .det import DetSolverConfig, solve_deterministic
from .errors import PrecmatError
from .penalty import ElasticNetPenalty
from .stochastic import StochConfig, solve_averaged, solve_stochastic

log = logging.getLogger(__name__)

ALGORITHMS = ("det", "stoch", "averaged")


def offdiag_density(theta: np.ndarray, tol: float = 1e-8) -> float:
    p = theta.shape[0]
    if p < 2:
        return 0.0
    off = np.count_nonzero(np.abs(theta) > tol) - np.count_nonzero(np.abs(np.diagonal(theta)) > tol)
    return off / (p * (p - 1))


LAMBDA_SCALE = 0.072


def default_lambda(p: int, n: int) -> float:
    """``0.072 * sqrt(log(p) / n)``: gives about ``10/p`` density on the synthetic problems."""
    return LAMBDA_SCALE * math.sqrt(math.log(p) / n)


def tune_lambda(
    s: np.ndarray,
    alpha: float,
    target_density: float,
    *,
    lo: float | None = None,
    hi: float | None = None,
    steps: int = 8,
    rel_tol: float = 1e-5,
) -> float:
    """Bisect ``log(lambda)`` until the solution's off-diagonal density is near ``target_density``.

    Each probe is a loose deterministic solve. The default bracket is a
    factor of 3 either side of :func:`default_lambda` for ``n = ceil(p/2)``.
    """
    p = s.shape[0]
    guess = default_lambda(p, math.ceil(p / 2))
    lo = guess / 3 if lo is None else lo
    hi = guess * 3 if hi is None else hi
    best_lam, best_gap = hi, math.inf
    for _ in range(steps):
        lam = math.sqrt(lo * hi)
        res = solve_deterministic(
            s,
            ElasticNetPenalty(lam, alpha),
            DetSolverConfig(gamma0=10.0, rel_tol=rel_tol, max_iters=2000, record_trace=False),
        )
        dens = offdiag_density(res.theta_hat)
        gap = abs(math.log(max(dens, 1.0 / p**2)) - math.log(target_density))
        if gap < best_gap:
            best_lam, best_gap = lam, gap
        if dens > target_density:
            lo = lam
        else:
            hi = lam
    return best_lam


@dataclass
class BenchRow:
    p: int
    seed: int
    algorithm: str
    lam: float
    alpha: float
    reached: bool
    iterations: int
    secs: float
    rel_error: float
    restarts: int


def time_to_tolerance(name, s, pen, reference, target_tol, *, seed=0, max_iters=None):
    """Run one algorithm until it reaches ``target_tol`` relative error (or its iteration cap)."""
    ref_norm = np.linalg.norm(reference)
    hit = {}
    last = {"err": math.inf, "k": 0}
    t0 = time.perf_counter()

    def cb(k, theta):
        err = float(np.linalg.norm(theta - reference) / ref_norm)
        last["err"], last["k"] = err, k
        if err <= target_tol:
            hit["t"] = time.perf_counter() - t0
            return True
        return False

    if name == "det":
        cfg = DetSolverConfig(gamma0=10.0, rel_tol=1e-12, max_iters=max_iters or 1000, record_trace=False)
        res = solve_deterministic(s, pen, cfg, callback=cb)
    elif name == "stoch":
        cfg = StochConfig(seed=seed, max_iters=max_iters or 300, rel_tol=1e-12, record_trace=False)
        res = solve_stochastic(s, pen, cfg, callback=cb)
    elif name == "averaged":
        cfg = StochConfig(seed=seed, max_iters=max_iters or 500, rel_tol=1e-12, record_trace=False)
        res = solve_averaged(s, pen, cfg, callback=cb)
    else:
        raise ValueError(f"unknown algorithm {name!r}")
    secs = hit.get("t", time.perf_counter() - t0)
    return "t" in hit, last["k"], secs, last["err"], res.restarts


def run_bench(
    p_list,
    seeds,
    algorithms=ALGORITHMS,
    target_tol: float = 0.1,
    alpha: float = 0.9,
    lam: float | None = None,
    max_iters: int | None = None,
    tune: bool = False,
) -> list[BenchRow]:
    rows = []
    for p in p_list:
        for seed in seeds:
            prob = generate_synthetic(p, seed=seed)
            if lam is not None:
                lam_ps = lam
            elif tune:
                lam_ps = tune_lambda(prob.s, alpha, min(1.0, 10.0 / p))
            else:
                lam_ps = default_lambda(p, prob.x.n)
            pen = ElasticNetPenalty(lam_ps, alpha)
            ref = solve_deterministic(
                prob.s, pen, DetSolverConfig(gamma0=10.0, rel_tol=1e-10, max_iters=5000, record_trace=False)
            ).theta_hat
            for name in algorithms:
                try:
                    reached, k, secs, err, restarts = time_to_tolerance(
                        name, prob.s, pen, ref, target_tol, seed=seed, max_iters=max_iters
                    )
                except PrecmatError as exc:
                    log.warning("p=%d seed=%d %s failed: %s", p, seed, name, exc)
                    reached, k, secs, err, restarts = False, 0, math.nan, math.nan, -1
                log.info("p=%d seed=%d %s reached=%s k=%d secs=%.3f err=%.3g", p, seed, name, reached, k, secs, err)
                rows.append(BenchRow(p, seed, name, lam_ps, alpha, reached, k, secs, err, restarts))
    return rows


def rows_to_csv(rows: list[BenchRow]) -> str:
    buf = io.StringIO()
    fields = list(BenchRow.__dataclass_fields__)
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(asdict(r))
    return buf.getvalue()
