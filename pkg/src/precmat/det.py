"""Deterministic proximal gradient with step-size restarts.

Each iteration applies ``T(theta) = prox(theta - gamma*(S - theta^-1))``,
which drops the positive-definiteness constraint from the proximal step.
The Cholesky factorization of the new iterate doubles as the PD test and as
the factor needed for the next inverse. When it fails the solver restarts
from the initial point with the step multiplied by ``step_shrink``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bounds import compute_bounds, default_step
from .errors import MaxRestartsExceeded, NonFiniteObjective, NotPositiveDefinite
from .linalg import SpdFactor, cholesky, eigendecompose, extreme_eigenvalues, invert_via_factor, mirror_lower
from .penalty import ElasticNetPenalty, kkt_residual, penalty_value, prox, smooth_value
from .results import NNZ_TOL, SolveResult, TraceRecorder, rel_change

# callback(k, theta) -> True to stop early
Callback = Callable[[int, np.ndarray], "bool | None"]

GAMMA_CAP = 10.0
ASCENT_RTOL = 1e-12


@dataclass
class DetSolverConfig:
    """Configuration for :func:`solve_deterministic`.

    ``gamma0=None`` picks the guaranteed-safe ``ell_star**2`` (or, with
    ``use_bounds=False``, ``min(1/lambda_max(S)**2, 10)``). ``guaranteed=True``
    forces ``gamma = ell_star**2`` and clips the start into the invariance box.
    """

    gamma0: float | None = None
    step_shrink: float = 0.5
    max_restarts: int = 60
    max_iters: int = 10_000
    rel_tol: float = 1e-8
    theta0: np.ndarray | None = None
    guaranteed: bool = False
    use_bounds: bool = True
    restart_on_ascent: bool = True
    kkt_zero_tol: float = 1e-12
    nnz_tol: float = NNZ_TOL
    record_trace: bool = True

    def __post_init__(self):
        if self.gamma0 is not None and self.gamma0 <= 0:
            raise ValueError("gamma0 must be positive")
        if not 0 < self.step_shrink < 1:
            raise ValueError("step_shrink must lie in (0, 1)")
        if self.max_iters < 0 or self.max_restarts < 0:
            raise ValueError("iteration and restart limits must be non-negative")
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be positive")


def check_problem(s: np.ndarray, pen: ElasticNetPenalty) -> np.ndarray:
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError(f"S must be square, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise NonFiniteObjective("S has non-finite entries")
    # lam = 0 is allowed here; it only has a solution when S is PD
    return mirror_lower(s)


def inverse_variance_start(s: np.ndarray) -> np.ndarray:
    """Diagonal matrix of inverse sample variances (zero variances map to 1)."""
    d = np.diagonal(s).copy()
    d[d <= 0] = 1.0
    return np.diag(1.0 / d)


def clip_spectrum(theta: np.ndarray, lo: float, hi: float) -> np.ndarray:
    if np.count_nonzero(theta - np.diag(np.diagonal(theta))) == 0:
        return np.diag(np.clip(np.diagonal(theta), lo, hi))
    spec = eigendecompose(theta)
    u = spec.eigenvectors
    return mirror_lower((u * np.clip(spec.eigenvalues, lo, hi)) @ u.T)


def fallback_step(s: np.ndarray) -> float:
    _, s_max = extreme_eigenvalues(s)
    if s_max <= 0:
        return GAMMA_CAP
    return min(1.0 / s_max**2, GAMMA_CAP)


def prox_grad_step(
    theta: np.ndarray,
    s: np.ndarray,
    pen: ElasticNetPenalty,
    gamma: float,
    theta_inv: np.ndarray | None = None,
) -> np.ndarray:
    """One relaxed proximal-gradient map; the result may be indefinite."""
    if theta_inv is None:
        theta_inv = invert_via_factor(cholesky(theta))
    return prox(theta - gamma * (s - theta_inv), gamma, pen)


def _objective_from_factor(theta, s, pen, f: SpdFactor) -> float:
    return smooth_value(theta, s, f.log_det) + penalty_value(theta, pen)


def initial_point(s, pen, theta0, guaranteed, bounds=None):
    theta = inverse_variance_start(s) if theta0 is None else mirror_lower(np.asarray(theta0, dtype=np.float64))
    if theta.shape != s.shape:
        raise ValueError(f"theta0 has shape {theta.shape}, expected {s.shape}")
    if guaranteed:
        if bounds is None:
            bounds = compute_bounds(s, pen)
        theta = clip_spectrum(theta, *bounds.start_box)
    return theta


def solve_deterministic(
    s: np.ndarray,
    pen: ElasticNetPenalty,
    cfg: DetSolverConfig | None = None,
    *,
    reference: np.ndarray | None = None,
    callback: Callback | None = None,
) -> SolveResult:
    """Minimize ``-log det(theta) + tr(theta S) + penalty(theta)``.

    ``reference`` adds a relative-error column to the trace. ``callback`` is
    invoked with ``(k, theta_k)`` for every accepted iterate including the
    start; a truthy return stops the run (``converged`` stays ``False``).
    """
    cfg = cfg or DetSolverConfig()
    s = check_problem(s, pen)
    bounds = None
    if cfg.guaranteed or (cfg.gamma0 is None and cfg.use_bounds and pen.lam > 0):
        bounds = compute_bounds(s, pen)
    if cfg.guaranteed:
        gamma = default_step(bounds)
    elif cfg.gamma0 is not None:
        gamma = cfg.gamma0
    elif bounds is not None:
        gamma = default_step(bounds)
    else:
        gamma = fallback_step(s)

    theta0 = initial_point(s, pen, cfg.theta0, cfg.guaranteed, bounds)
    try:
        f0 = cholesky(theta0)
    except NotPositiveDefinite as exc:
        raise ValueError("theta0 must be positive definite") from exc
    inv0 = invert_via_factor(f0)
    obj0 = _objective_from_factor(theta0, s, pen, f0)
    if not np.isfinite(obj0):
        raise NonFiniteObjective("objective at the starting point is not finite")

    rec = TraceRecorder(cfg.record_trace, reference, cfg.nnz_tol)
    theta, inv, obj = theta0, inv0, obj0
    rec.record(0, theta, obj, gamma, float("nan"))
    restarts = 0
    k = 0
    converged = False
    stopped = bool(callback and callback(0, theta))

    while not stopped and k < cfg.max_iters:
        cand = prox_grad_step(theta, s, pen, gamma, inv)
        try:
            fc = cholesky(cand)
            obj_c = _objective_from_factor(cand, s, pen, fc)
            if np.isnan(obj_c):
                raise NonFiniteObjective("objective evaluated to NaN")
            reject = cfg.restart_on_ascent and obj_c > obj + ASCENT_RTOL * max(1.0, abs(obj))
        except NotPositiveDefinite:
            reject = True
        if reject:
            restarts += 1
            if restarts > cfg.max_restarts:
                raise MaxRestartsExceeded(f"gave up after {cfg.max_restarts} restarts (step={gamma:.3g})")
            gamma *= cfg.step_shrink
            theta, inv, obj = theta0, inv0, obj0
            continue

        change = rel_change(cand, theta)
        theta, obj = cand, obj_c
        inv = invert_via_factor(fc)
        k += 1
        rec.record(k, theta, obj, gamma, change)
        if callback and callback(k, theta):
            break
        if change <= cfg.rel_tol:
            converged = True
            break

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
