"""Solver outputs and per-iteration trace records."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

NNZ_TOL = 1e-8


@dataclass
class TraceRecord:
    iter: int
    elapsed_s: float
    objective: float
    step: float
    nnz: int
    rel_change: float
    batch_n: int | None = None
    rel_error: float | None = None

    FIELDS = ("iter", "elapsed_s", "objective", "step", "batch_n", "nnz", "rel_change", "rel_error")

    def as_row(self) -> dict:
        return {k: getattr(self, k) for k in self.FIELDS}


@dataclass
class SolveResult:
    theta_hat: np.ndarray
    iterations: int
    restarts: int
    converged: bool
    trace: list[TraceRecord] = field(default_factory=list)
    kkt_residual: float = float("nan")
    objective: float = float("nan")
    elapsed_s: float = 0.0

    def summary(self) -> str:
        return (
            f"converged={str(self.converged).lower()} iters={self.iterations} "
            f"restarts={self.restarts} obj={self.objective:.10g} "
            f"kkt={self.kkt_residual:.3e} secs={self.elapsed_s:.3f}"
        )


class TraceRecorder:
    """Builds :class:`TraceRecord` rows; ``enabled=False`` makes it a no-op."""

    def __init__(self, enabled: bool = True, reference: np.ndarray | None = None, nnz_tol: float = NNZ_TOL):
        self.enabled = enabled
        self.reference = reference
        self.ref_norm = float(np.linalg.norm(reference)) if reference is not None else None
        self.nnz_tol = nnz_tol
        self.records: list[TraceRecord] = []
        self.t0 = time.perf_counter()

    def elapsed(self) -> float:
        return time.perf_counter() - self.t0

    def record(self, it, theta, objective, step, rel_change, batch_n=None):
        if not self.enabled:
            return
        rel_error = None
        if self.reference is not None:
            rel_error = float(np.linalg.norm(theta - self.reference) / self.ref_norm)
        self.records.append(
            TraceRecord(
                iter=it,
                elapsed_s=self.elapsed(),
                objective=float(objective),
                step=float(step),
                nnz=int(np.count_nonzero(np.abs(theta) > self.nnz_tol)),
                rel_change=float(rel_change),
                batch_n=batch_n,
                rel_error=rel_error,
            )
        )


def rel_change(new: np.ndarray, old: np.ndarray) -> float:
    return float(np.linalg.norm(new - old) / max(1.0, np.linalg.norm(old)))
