"""Gaussian sampling from N(0, theta^-1) through a Cholesky factor of theta.

Draws use NumPy's ``Generator`` on the PCG64 bit generator with ziggurat
normals. Results are reproducible for a given seed on one platform; bitwise
agreement across platforms and BLAS builds is not promised.

With ``theta = L L^T`` and ``R = L^T``, a draw is ``z = R^{-1} u`` for
``u ~ N(0, I)``, so ``cov(z) = R^{-1} R^{-T} = theta^{-1}``. The sample
covariance is accumulated block by block with symmetric rank-k updates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import blas, solve_triangular

from .linalg import SpdFactor, cholesky, mirror_lower

BLOCK = 1024


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class SampleCovariance:
    matrix: np.ndarray
    n_samples: int


class GaussianSampler:
    """Sampler bound to one precision factor; owns (or shares) a generator.

    Not safe for concurrent draws: the generator state is mutated.
    """

    def __init__(self, factor: SpdFactor, rng: np.random.Generator):
        self.factor = factor
        self.rng = rng

    @property
    def dim(self) -> int:
        return self.factor.dim

    def _block(self, m: int) -> np.ndarray:
        # (p, m) Fortran-ordered block of draws, one draw per column
        u = self.rng.standard_normal((m, self.dim)).T
        return solve_triangular(self.factor.lower, u, lower=True, trans="T", check_finite=False)

    def sample(self, n: int) -> np.ndarray:
        """``n`` draws as rows of an ``(n, p)`` array."""
        out = np.empty((n, self.dim))
        for start in range(0, n, BLOCK):
            m = min(BLOCK, n - start)
            out[start : start + m] = self._block(m).T
        return out

    def sample_cov(self, n: int) -> SampleCovariance:
        if n < 1:
            raise ValueError("need at least one draw")
        p = self.dim
        acc = np.zeros((p, p), order="F")
        for start in range(0, n, BLOCK):
            m = min(BLOCK, n - start)
            z = self._block(m)
            acc = blas.dsyrk(1.0, z, beta=1.0, c=acc, lower=1, overwrite_c=1)
        acc /= n
        return SampleCovariance(matrix=np.ascontiguousarray(mirror_lower(acc)), n_samples=n)


def sampler_from_precision(theta: np.ndarray, seed) -> GaussianSampler:
    """Raises :class:`~precmat.errors.NotPositiveDefinite` for an indefinite ``theta``."""
    return GaussianSampler(cholesky(theta), make_rng(seed))


def draw_sample_cov(sampler: GaussianSampler, n: int) -> SampleCovariance:
    return sampler.sample_cov(n)
