"""Stochastic proximal gradient: the inverse is replaced by a Monte Carlo estimate.

Two estimators of ``theta_k^{-1}`` are provided:

* :func:`solve_stochastic` draws a fresh batch of ``N_k = ceil(base + k**q)``
  samples from ``N(0, theta_k^{-1})`` at every iteration;
* :func:`solve_averaged` draws a fixed ``N`` samples and folds them into a
  running estimate ``Sigma <- Sigma + zeta_k (Sigma_hat - Sigma)`` with
  ``zeta_k = c * k**(-a)``, recycling earlier draws.

Samples come from the Cholesky factor of the current iterate, and that same
factorization is the positive-definiteness test. On failure the run restarts
from the last PD iterate with a smaller step (and, for fresh batches, a
doubled batch base).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .bounds import compute_bounds, default_step
from .det import Callback, check_problem, initial_point
from .errors import InvalidSchedule, MaxRestartsExceeded, NonFiniteObjective, NotPositiveDefinite
from .linalg import SpdFactor, cholesky, invert_via_factor, mirror_lower
from .penalty import ElasticNetPenalty, kkt_residual, penalty_value, prox, smooth_value
from .results import NNZ_TOL, SolveResult, TraceRecorder, rel_change
from .sampler import GaussianSampler, make_rng


@dataclass(frozen=True)
class BatchSchedule:
    """``N_k = ceil(base + k**exponent)``; ``exponent > 1`` keeps ``sum 1/N_k`` finite."""

    base: float = 30
    exponent: float = 1.8

    def __post_init__(self):
        if self.base < 1:
            raise InvalidSchedule("batch base must be at least 1")
        if not self.exponent > 1:
            raise InvalidSchedule(f"batch exponent must exceed 1, got {self.exponent}")

    def size(self, k: int) -> int:
        return math.ceil(self.base + k**self.exponent)

    def scaled(self, factor: float) -> "BatchSchedule":
        return replace(self, base=self.base * factor)


@dataclass(frozen=True)
class AveragingSchedule:
    """Weights ``zeta_k = coefficient * k**(-decay)`` for ``k >= 1``.

    ``decay`` in ``(0.5, 1]`` gives ``sum zeta = inf`` and ``sum zeta**2 < inf``.
    """

    coefficient: float = 1.0
    decay: float = 0.7

    def __post_init__(self):
        if not self.coefficient > 0:
            raise InvalidSchedule("averaging coefficient must be positive")
        if not 0.5 < self.decay <= 1.0:
            raise InvalidSchedule(f"averaging decay must lie in (0.5, 1], got {self.decay}")

    def weight(self, k: int) -> float:
        return self.coefficient * k ** (-self.decay)


@dataclass
class StochConfig:
    """``gamma0=None`` selects the safe step ``ell_star**2`` from the spectral bounds.

    The default of 10 suits problems whose solution has eigenvalues well
    above 1; when ``theta_hat`` is small a large step oscillates without ever
    leaving the PD cone, so no restart rescues it.
    """

    gamma0: float | None = 10.0
    step_shrink: float = 0.5
    max_restarts: int = 60
    max_iters: int = 300
    rel_tol: float = 1e-4
    patience: int = 5
    seed: int = 0
    batch: BatchSchedule = field(default_factory=BatchSchedule)
    fixed_n: int = 400
    averaging: AveragingSchedule = field(default_factory=AveragingSchedule)
    sigma0: np.ndarray | None = None
    theta0: np.ndarray | None = None
    kkt_zero_tol: float = 1e-12
    nnz_tol: float = NNZ_TOL
    record_trace: bool = True

    def __post_init__(self):
        if self.gamma0 is not None and self.gamma0 <= 0:
            raise ValueError("gamma0 must be positive")
        if not 0 < self.step_shrink < 1:
            raise ValueError("step_shrink must lie in (0, 1)")
        if self.fixed_n < 1:
            raise InvalidSchedule("fixed_n must be at least 1")
        if self.patience < 1:
            raise ValueError("patience must be at least 1")


class _FreshBatches:
    """Fresh Monte Carlo batch every iteration; the schedule index keeps counting across restarts."""

    def __init__(self, cfg: StochConfig, p: int):
        self.schedule = cfg.batch

    def estimate(self, sampler: GaussianSampler, k: int) -> tuple[np.ndarray, int]:
        n = self.schedule.size(k)
        return sampler.sample_cov(n).matrix, n

    def on_restart(self):
        self.schedule = self.schedule.scaled(2.0)


class _Averaged:
    """Running average of fixed-size batches; a restart resets it to ``sigma0``."""

    def __init__(self, cfg: StochConfig, p: int):
        self.n = cfg.fixed_n
        self.weights = cfg.averaging
        self.sigma0 = np.eye(p) if cfg.sigma0 is None else mirror_lower(np.asarray(cfg.sigma0, dtype=np.float64))
        if self.sigma0.shape != (p, p):
            raise ValueError(f"sigma0 has shape {self.sigma0.shape}, expected {(p, p)}")
        self.reset()

    def reset(self):
        self.sigma = self.sigma0.copy()
        self.j = 0

    def estimate(self, sampler: GaussianSampler, k: int) -> tuple[np.ndarray, int]:
        self.j += 1
        fresh = sampler.sample_cov(self.n).matrix
        self.sigma = self.sigma + self.weights.weight(self.j) * (fresh - self.sigma)
        return self.sigma, self.n

    def on_restart(self):
        self.reset()


def _objective(theta, s, pen, f: SpdFactor) -> float:
    return smooth_value(theta, s, f.log_det) + penalty_value(theta, pen)


def _run(s, pen, cfg: StochConfig, estimator_cls, reference, callback) -> SolveResult:
    s = check_problem(s, pen)
    p = s.shape[0]
    rng = make_rng(cfg.seed)
    est = estimator_cls(cfg, p)
    theta = initial_point(s, pen, cfg.theta0, guaranteed=False)
    try:
        f = cholesky(theta)
    except NotPositiveDefinite as exc:
        raise ValueError("theta0 must be positive definite") from exc
    obj = _objective(theta, s, pen, f)
    gamma = cfg.gamma0 if cfg.gamma0 is not None else default_step(compute_bounds(s, pen))

    rec = TraceRecorder(cfg.record_trace, reference, cfg.nnz_tol)
    rec.record(0, theta, obj, gamma, float("nan"))
    restarts = 0
    k = 0
    calm = 0
    converged = False
    stopped = bool(callback and callback(0, theta))

    while not stopped and k < cfg.max_iters:
        sigma, n_k = est.estimate(GaussianSampler(f, rng), k)
        cand = prox(theta - gamma * (s - sigma), gamma, pen)
        try:
            fc = cholesky(cand)
        except NotPositiveDefinite:
            restarts += 1
            if restarts > cfg.max_restarts:
                raise MaxRestartsExceeded(f"gave up after {cfg.max_restarts} restarts (step={gamma:.3g})") from None
            gamma *= cfg.step_shrink
            est.on_restart()
            continue
        obj_c = _objective(cand, s, pen, fc)
        if np.isnan(obj_c):
            raise NonFiniteObjective("objective evaluated to NaN")

        change = rel_change(cand, theta)
        theta, f, obj = cand, fc, obj_c
        k += 1
        rec.record(k, theta, obj, gamma, change, batch_n=n_k)
        if callback and callback(k, theta):
            break
        calm = calm + 1 if change <= cfg.rel_tol else 0
        if calm >= cfg.patience:
            converged = True
            break

    inv = invert_via_factor(f)
    return SolveResult(
        theta_hat=theta,
        iterations=k,
        restarts=restarts,
        converged=converged,
        trace=rec.records,
        kkt_residual=kkt_residual(theta, s, pen, cfg.kkt_zero_tol, theta_inv=inv),
        objective=obj,
        elapsed_s=rec.elapsed(),
    )


def solve_stochastic(
    s: np.ndarray,
    pen: ElasticNetPenalty,
    cfg: StochConfig | None = None,
    *,
    reference: np.ndarray | None = None,
    callback: Callback | None = None,
) -> SolveResult:
    """Proximal gradient with a fresh, growing Monte Carlo batch per iteration."""
    return _run(s, pen, cfg or StochConfig(), _FreshBatches, reference, callback)


def solve_averaged(
    s: np.ndarray,
    pen: ElasticNetPenalty,
    cfg: StochConfig | None = None,
    *,
    reference: np.ndarray | None = None,
    callback: Callback | None = None,
) -> SolveResult:
    """Proximal gradient with a fixed batch size and sample recycling."""
    return _run(s, pen, cfg or StochConfig(max_iters=500), _Averaged, reference, callback)
