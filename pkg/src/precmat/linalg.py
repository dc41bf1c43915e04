"""Dense symmetric linear algebra kernels.

Matrices are plain ``float64`` ndarrays. The lower triangle is authoritative:
:func:`as_symmetric` mirrors it onto the upper triangle so every matrix
handed around the package is exactly (bitwise) symmetric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from .errors import ConvergenceFailure, NotPositiveDefinite


def mirror_lower(a: np.ndarray) -> np.ndarray:
    """Return a new array whose upper triangle is a copy of ``a``'s lower triangle."""
    low = np.tril(a)
    return low + np.tril(low, -1).T


def as_symmetric(a, *, check_finite: bool = True) -> np.ndarray:
    """Coerce ``a`` to a square float64 array, symmetric by lower-triangle authority."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if check_finite and not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return mirror_lower(a)


@dataclass(frozen=True)
class SpdFactor:
    """Cholesky factor ``lower`` with ``A = lower @ lower.T``."""

    lower: np.ndarray
    log_det: float

    @property
    def dim(self) -> int:
        return self.lower.shape[0]


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # columns

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return mirror_lower((u * self.eigenvalues) @ u.T)


def cholesky(a: np.ndarray) -> SpdFactor:
    """Factor a symmetric matrix, raising :class:`NotPositiveDefinite` on failure.

    This is the positive-definiteness test used by every solver: a pivot that
    is non-positive (or non-finite) means ``lambda_min(a) <= 0``.
    """
    a = np.asarray(a, dtype=np.float64)
    if not np.all(np.isfinite(a)):
        raise NotPositiveDefinite("matrix has non-finite entries")
    c, info = lapack.dpotrf(a, lower=1, clean=1, overwrite_a=0)
    if info != 0:
        raise NotPositiveDefinite(f"Cholesky failed at pivot {info}")
    diag = np.diagonal(c)
    if not np.all(np.isfinite(diag)) or np.any(diag <= 0.0):
        raise NotPositiveDefinite("Cholesky produced a non-positive pivot")
    return SpdFactor(lower=c, log_det=float(2.0 * np.sum(np.log(diag))))


def invert_via_factor(f: SpdFactor) -> np.ndarray:
    """Inverse of the factored matrix, exactly symmetric."""
    inv, info = lapack.dpotri(f.lower, lower=1)
    if info != 0:
        raise NotPositiveDefinite(f"dpotri failed (info={info})")
    return mirror_lower(inv)


def extreme_eigenvalues(a: np.ndarray) -> tuple[float, float]:
    """Smallest and largest eigenvalue of a symmetric matrix."""
    w = _eigvalsh(a)
    return float(w[0]), float(w[-1])


def spectral_norm(a: np.ndarray) -> float:
    lo, hi = extreme_eigenvalues(a)
    return max(abs(lo), abs(hi))


def eigendecompose(a: np.ndarray) -> Spectrum:
    a = np.asarray(a, dtype=np.float64)
    try:
        w, u = np.linalg.eigh(a, UPLO="L")
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return Spectrum(eigenvalues=w, eigenvectors=u)


def _eigvalsh(a: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.eigvalsh(np.asarray(a, dtype=np.float64), UPLO="L")
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
