"""Closed-form solution of the ridge (``alpha = 0``) problem.

With ``S = U diag(d) U^T`` the minimizer of
``-log det(theta) + tr(theta S) + lam/2 * ||theta||_F^2`` shares the
eigenvectors of ``S`` and has eigenvalues solving ``lam*x^2 + d*x - 1 = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import DatasetMatrix, sample_covariance
from .errors import ConvergenceFailure, DimensionMismatch
from .linalg import Spectrum, eigendecompose, mirror_lower


@dataclass(frozen=True)
class RidgeSolution:
    """``sigma[i]`` is the eigenvalue of ``theta_hat`` paired with ``spectrum_of_s.eigenvalues[i]``.

    From the data path the spectrum only covers the row space of ``X``;
    ``sigma`` then has ``p`` entries, the trailing ones equal to ``1/sqrt(lam)``.
    """

    theta_hat: np.ndarray
    sigma: np.ndarray
    spectrum_of_s: Spectrum


def ridge_eigenvalues(d, lam: float) -> np.ndarray:
    """Positive root of ``lam*x**2 + d*x - 1 = 0`` for each ``d``."""
    d = np.asarray(d, dtype=np.float64)
    disc = np.sqrt(d * d + 4.0 * lam)
    # cancellation-free branch for d >= 0
    return np.where(d >= 0, 2.0 / (d + disc), (disc - d) / (2.0 * lam))


def _check_lambda(lam):
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")


def solve_ridge_exact(s: np.ndarray, lam: float) -> RidgeSolution:
    _check_lambda(lam)
    spec = eigendecompose(np.asarray(s, dtype=np.float64))
    sigma = ridge_eigenvalues(spec.eigenvalues, lam)
    u = spec.eigenvectors
    theta = mirror_lower((u * sigma) @ u.T)
    return RidgeSolution(theta_hat=theta, sigma=sigma, spectrum_of_s=spec)


def solve_ridge_from_data(x, lam: float) -> RidgeSolution:
    """Ridge solution for ``S = X^T X / n`` via a thin SVD of ``X`` when ``n < p``."""
    _check_lambda(lam)
    v = x.values if isinstance(x, DatasetMatrix) else np.asarray(x, dtype=np.float64)
    if v.ndim != 2 or v.shape[0] < 1:
        raise DimensionMismatch(f"expected an (n, p) data matrix, got shape {v.shape}")
    n, p = v.shape
    if n >= p:
        return solve_ridge_exact(sample_covariance(v), lam)
    try:
        _, sv, vt = np.linalg.svd(v, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    d = sv[::-1] ** 2 / n  # ascending, like eigendecompose
    sigma_r = ridge_eigenvalues(d, lam)
    base = 1.0 / np.sqrt(lam)
    ur = vt[::-1].T  # (p, n) orthonormal columns spanning the row space
    theta = base * np.eye(p) + (ur * (sigma_r - base)) @ ur.T
    sigma = np.concatenate([sigma_r, np.full(p - n, base)])
    return RidgeSolution(
        theta_hat=mirror_lower(theta),
        sigma=sigma,
        spectrum_of_s=Spectrum(eigenvalues=d, eigenvectors=ur),
    )


def subsample_warm_start(x, lam: float, m: int, seed=0) -> np.ndarray:
    """Ridge solution on ``m`` rows of ``X`` drawn without replacement.

    Cheap (thin SVD when ``m < p``) and always PD, so it makes a reasonable
    starting point for the iterative solvers on the full data.
    """
    v = x.values if isinstance(x, DatasetMatrix) else np.asarray(x, dtype=np.float64)
    n = v.shape[0]
    if not 1 <= m <= n:
        raise ValueError(f"subsample size must lie in [1, {n}], got {m}")
    rows = np.random.default_rng(seed).choice(n, size=m, replace=False)
    return solve_ridge_from_data(v[np.sort(rows)], lam).theta_hat
