"""Computable spectral box for the solution and the proximal-gradient iterates.

All quantities follow from ``S`` and the penalty alone:

* ``ell_star``  lower bound on ``lambda_min(theta_hat)``
* ``psi_ub``    upper bound on ``lambda_max(theta_hat)``, ``min(u1, u2)``
* ``psi_star``  upper bound on ``lambda_max`` of every iterate when the step
  is at most ``ell_star**2`` and the start lies in the box
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRate, NotPositiveDefinite
from .linalg import cholesky, extreme_eigenvalues, invert_via_factor
from .penalty import ElasticNetPenalty

_GRID = np.arange(1, 50) / 50.0  # 0.02, 0.04, ..., 0.98
_REFINE_WIDTH = 1e-4
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SpectralBounds:
    mu: float
    nu: float
    ell_star: float
    u1: float
    u2: float
    psi_ub: float
    psi_star1: float
    psi_star: float

    @property
    def cond_ub(self) -> float:
        return self.psi_ub / self.ell_star

    @property
    def start_box(self) -> tuple[float, float]:
        """Eigenvalue interval a starting point must lie in for the invariance guarantee."""
        return self.ell_star, min(self.psi_ub, self.psi_star1)


def _positive_root(b: float, lambda2: float) -> float:
    """Positive root of ``2*lambda2*x**2 + b*x - 1 = 0`` (``1/b`` when ``lambda2 = 0``)."""
    if lambda2 == 0.0:
        return 1.0 / b if b > 0 else math.inf
    disc = math.sqrt(b * b + 8.0 * lambda2)
    if b >= 0:
        return 2.0 / (b + disc)
    return (-b + disc) / (4.0 * lambda2)


def c_of_t(t: float, s: np.ndarray, pen: ElasticNetPenalty, ell_star: float) -> float:
    """Upper-bound function whose infimum over ``t in (0, 1)`` is ``u2``."""
    p = s.shape[0]
    l1, l2 = pen.lambda1, pen.lambda2
    try:
        theta_t = invert_via_factor(cholesky(s + t * l1 * np.eye(p)))
    except NotPositiveDefinite:
        # S singular and t*lambda1 below rounding: no bound from this t
        return math.inf
    num = (
        l1 * np.abs(theta_t).sum()
        - t * l1 * np.trace(theta_t)
        + l2 * np.square(theta_t).sum()
        - l2 * ell_star**2 * p
    )
    with np.errstate(over="ignore"):
        return float(num / (l1 * (1.0 - t)))


def _golden_min(f, a: float, b: float, width: float) -> tuple[float, float]:
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > width:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def minimize_c(s: np.ndarray, pen: ElasticNetPenalty, ell_star: float) -> tuple[float, float]:
    """Grid search on ``_GRID`` followed by golden-section refinement.

    Returns ``(t, c(t))``. Every evaluated ``c(t)`` is itself a valid bound,
    so the smallest value seen is returned.
    """

    def f(t):
        return c_of_t(t, s, pen, ell_star)

    vals = np.array([f(t) for t in _GRID])
    i = int(np.argmin(vals))
    best_t, best = float(_GRID[i]), float(vals[i])
    lo = _GRID[i - 1] if i > 0 else _GRID[0] / 2.0
    hi = _GRID[i + 1] if i + 1 < len(_GRID) else (_GRID[-1] + 1.0) / 2.0
    t, v = _golden_min(f, float(lo), float(hi), _REFINE_WIDTH)
    if v < best:
        best_t, best = t, v
    return best_t, best


def compute_bounds(s: np.ndarray, pen: ElasticNetPenalty) -> SpectralBounds:
    pen.require_positive()
    s = np.asarray(s, dtype=np.float64)
    p = s.shape[0]
    l1, l2 = pen.lambda1, pen.lambda2
    s_min, s_max = extreme_eigenvalues(s)
    mu = max(abs(s_min), abs(s_max)) + l1 * p
    nu = s_min - l1 * p

    # alpha = 1 is the lambda2 = 0 limit of the quadratic-root formulas
    ell_star = _positive_root(mu, l2)
    if l2 == 0.0:
        psi_star1 = 1.0 / nu if nu > 0 else math.inf
    else:
        psi_star1 = _positive_root(nu, l2)

    if l1 > 0:
        with np.errstate(over="ignore"):
            u1 = (p - ell_star * np.trace(s) - 2.0 * p * l2 * ell_star**2) / l1
        _, u2 = minimize_c(s, pen, ell_star)
    else:
        # pure ridge: both bounds divide by lambda1
        u1 = u2 = math.inf
    psi_ub = min(u1, u2)
    with np.errstate(over="ignore"):
        psi_star = min(psi_star1, psi_ub + math.sqrt(p) * (psi_ub - ell_star))
    return SpectralBounds(
        mu=float(mu),
        nu=float(nu),
        ell_star=float(ell_star),
        u1=float(u1),
        u2=float(u2),
        psi_ub=float(psi_ub),
        psi_star1=float(psi_star1),
        psi_star=float(psi_star),
    )


def default_step(b: SpectralBounds) -> float:
    """Largest step with the iterate-invariance guarantee."""
    return b.ell_star**2


def iteration_budget(ell: float, psi: float, epsilon: float, q: float) -> int:
    """Iterations for the stochastic scheme to reach mean squared error ``epsilon``.

    ``max((psi^2/ell^2/epsilon)**(1/q), log(1/epsilon)/log(1/rho))`` with
    ``rho = 1 - ell^2/psi^2``; when ``ell == psi`` the contraction is exact
    in one step and only the sampling term remains.
    """
    if not (0 < ell <= psi < math.inf):
        raise DegenerateRate(f"need 0 < ell <= psi < inf, got ell={ell}, psi={psi}")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if q <= 1:
        raise ValueError("q must exceed 1")
    ratio = (psi / ell) ** 2
    sampling = (ratio / epsilon) ** (1.0 / q)
    rho = 1.0 - 1.0 / ratio
    if rho <= 0.0:
        return math.ceil(sampling)
    contraction = math.log(1.0 / epsilon) / math.log(1.0 / rho)
    return math.ceil(max(sampling, contraction))
