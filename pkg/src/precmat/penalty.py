"""Elastic-net penalty, its proximal map, the objective and a KKT certificate."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotPositiveDefinite
from .linalg import cholesky, invert_via_factor


@dataclass(frozen=True)
class ElasticNetPenalty:
    """Penalty ``sum_ij lambda1*|t_ij| + lambda2*t_ij**2``.

    ``lambda1 = alpha*lam`` and ``lambda2 = (1 - alpha)*lam/2``. ``lam = 0`` is
    accepted so the unpenalized objective can be evaluated; the solvers and
    bound computations insist on ``lam > 0``.
    """

    lam: float
    alpha: float

    def __post_init__(self):
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ValueError(f"lambda must be finite and >= 0, got {self.lam}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")

    @property
    def lambda1(self) -> float:
        return self.alpha * self.lam

    @property
    def lambda2(self) -> float:
        return (1.0 - self.alpha) * self.lam / 2.0

    def require_positive(self):
        if self.lam <= 0:
            raise ValueError("lambda must be strictly positive for this operation")


def prox(theta: np.ndarray, gamma: float, pen: ElasticNetPenalty) -> np.ndarray:
    """Entrywise soft-threshold by ``lambda1*gamma`` then shrink by ``1 + 2*lambda2*gamma``."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    theta = np.asarray(theta, dtype=np.float64)
    shift = pen.lambda1 * gamma
    scale = 1.0 + 2.0 * pen.lambda2 * gamma
    mag = np.abs(theta) - shift
    np.maximum(mag, 0.0, out=mag)
    out = np.copysign(mag, theta)
    out /= scale
    return out


def penalty_value(theta: np.ndarray, pen: ElasticNetPenalty) -> float:
    # both triangles and the diagonal are penalized
    theta = np.asarray(theta, dtype=np.float64)
    return float(pen.lambda1 * np.abs(theta).sum() + pen.lambda2 * np.square(theta).sum())


def smooth_value(theta: np.ndarray, s: np.ndarray, log_det: float) -> float:
    return float(-log_det + np.vdot(theta, s))


def objective(theta: np.ndarray, s: np.ndarray, pen: ElasticNetPenalty) -> float:
    """``-log det(theta) + tr(theta S) + penalty``; ``+inf`` off the PD cone."""
    theta = np.asarray(theta, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    if theta.shape != s.shape:
        raise ValueError(f"shape mismatch {theta.shape} vs {s.shape}")
    try:
        f = cholesky(theta)
    except NotPositiveDefinite:
        return float("inf")
    return smooth_value(theta, s, f.log_det) + penalty_value(theta, pen)


def kkt_residual(
    theta: np.ndarray,
    s: np.ndarray,
    pen: ElasticNetPenalty,
    zero_tol: float = 1e-12,
    theta_inv: np.ndarray | None = None,
) -> float:
    """Max-norm violation of ``0 in -theta^-1 + S + 2*lambda2*theta + lambda1*d|theta|``.

    On the support the subgradient is ``sign(theta)``; off it any value in
    ``[-lambda1, lambda1]`` may be chosen, so only the excess counts.
    """
    theta = np.asarray(theta, dtype=np.float64)
    if theta_inv is None:
        theta_inv = invert_via_factor(cholesky(theta))
    g = -theta_inv + s + 2.0 * pen.lambda2 * theta
    support = np.abs(theta) > zero_tol
    on = np.abs(g + pen.lambda1 * np.sign(theta))
    off = np.maximum(np.abs(g) - pen.lambda1, 0.0)
    r = np.where(support, on, off)
    return float(r.max()) if r.size else 0.0


def scalar_solution(s_ii, pen: ElasticNetPenalty):
    """Minimizer of ``-log t + s*t + lambda1*t + lambda2*t**2`` over ``t > 0``.

    This is the exact solution for a 1x1 problem, hence for every isolated
    node after thresholding. Written in the cancellation-free form of the
    positive quadratic root.
    """
    b = np.asarray(s_ii, dtype=np.float64) + pen.lambda1
    return 2.0 / (b + np.sqrt(b * b + 8.0 * pen.lambda2))
