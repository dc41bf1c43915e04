"""Elastic-net penalized precision matrix estimation by proximal gradient."""

from .bounds import SpectralBounds, compute_bounds, iteration_budget
from .data import DatasetMatrix, SyntheticProblem, generate_synthetic, read_matrix, sample_covariance, write_matrix
from .det import DetSolverConfig, solve_deterministic
from .errors import (
    ConvergenceFailure,
    DegenerateRate,
    DimensionMismatch,
    InvalidSchedule,
    MaxRestartsExceeded,
    NonFiniteObjective,
    NotPositiveDefinite,
    NotSymmetric,
    ParseError,
    PrecmatError,
)
from .penalty import ElasticNetPenalty, kkt_residual, objective, prox
from .results import SolveResult, TraceRecord
from .ridge import RidgeSolution, solve_ridge_exact, solve_ridge_from_data
from .sampler import GaussianSampler, sampler_from_precision
from .stochastic import AveragingSchedule, BatchSchedule, StochConfig, solve_averaged, solve_stochastic
from .threshold import ComponentPartition, solve_blockwise, threshold_components

__version__ = "0.1.0"
