"""Exact covariance thresholding and blockwise solving.

Nodes ``i != j`` are joined when ``|s_ij| > alpha*lambda`` (strictly). The
solution is block diagonal over the connected components of that graph, so
each component can be solved on its own and the pieces assembled with
exact zeros in between. Isolated nodes have a closed-form solution.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .det import DetSolverConfig, check_problem, solve_deterministic
from .errors import PrecmatError
from .linalg import mirror_lower
from .penalty import ElasticNetPenalty, kkt_residual, objective, scalar_solution
from .results import SolveResult, TraceRecord
from .stochastic import StochConfig, solve_averaged, solve_stochastic

SOLVERS = {
    "det": solve_deterministic,
    "stoch": solve_stochastic,
    "averaged": solve_averaged,
}


class UnionFind:
    """Disjoint sets over ``0..n-1`` with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True

    def groups(self) -> list[list[int]]:
        out: dict[int, list[int]] = {}
        for i in range(len(self.parent)):
            out.setdefault(self.find(i), []).append(i)
        return sorted(out.values(), key=lambda g: g[0])


@dataclass(frozen=True)
class ComponentPartition:
    components: list[list[int]]  # 0-based, each sorted, ordered by smallest member

    @property
    def sizes(self) -> list[int]:
        return [len(c) for c in self.components]

    def labels(self, p: int) -> np.ndarray:
        lab = np.empty(p, dtype=int)
        for j, comp in enumerate(self.components):
            lab[comp] = j
        return lab

    def as_sets(self) -> set[frozenset[int]]:
        return {frozenset(c) for c in self.components}


def threshold_edges(s: np.ndarray, cut: float) -> tuple[np.ndarray, np.ndarray]:
    """Upper-triangle index pairs with ``|s_ij| > cut``."""
    s = np.asarray(s)
    i, j = np.nonzero(np.triu(np.abs(s) > cut, 1))
    return i, j


def components_from_edges(p: int, i, j) -> ComponentPartition:
    uf = UnionFind(p)
    for a, b in zip(i.tolist(), j.tolist()):
        uf.union(a, b)
    return ComponentPartition(uf.groups())


def threshold_components(s: np.ndarray, pen: ElasticNetPenalty) -> ComponentPartition:
    """Connected components of ``1(|s_ij| > alpha*lambda)``.

    With ``alpha*lambda = 0`` every nonzero off-diagonal entry is an edge, so
    a dense ``S`` yields a single component.
    """
    s = np.asarray(s, dtype=np.float64)
    i, j = threshold_edges(s, pen.lambda1)
    return components_from_edges(s.shape[0], i, j)


def support_components(theta: np.ndarray, tol: float = 1e-8) -> ComponentPartition:
    """Connected components of the graph of entries with ``|theta_ij| > tol``."""
    i, j = threshold_edges(theta, tol)
    return components_from_edges(np.asarray(theta).shape[0], i, j)


def default_workers() -> int:
    env = os.environ.get("PRECMAT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


class BlockSolveError(PrecmatError):
    def __init__(self, block: int, nodes: list[int], cause: Exception):
        self.block = block
        self.nodes = nodes
        super().__init__(f"block {block} ({len(nodes)} nodes): {cause}")


def _block_config(cfg, block: int):
    if cfg is None or not isinstance(cfg, StochConfig):
        return cfg
    return replace(cfg, seed=cfg.seed ^ block)


def solve_blockwise(
    s: np.ndarray,
    pen: ElasticNetPenalty,
    solver: str = "det",
    cfg: DetSolverConfig | StochConfig | None = None,
    *,
    partition: ComponentPartition | None = None,
    workers: int | None = None,
) -> SolveResult:
    """Solve each thresholded component separately and assemble the result.

    Stochastic blocks get seed ``cfg.seed ^ block_index`` so the outcome does
    not depend on scheduling. The assembled trace concatenates block traces
    (``iter`` and ``elapsed_s`` are offset so both stay nondecreasing).
    """
    s = check_problem(s, pen)
    p = s.shape[0]
    if solver not in SOLVERS:
        raise ValueError(f"unknown solver {solver!r}; choose from {sorted(SOLVERS)}")
    solve = SOLVERS[solver]
    part = partition or threshold_components(s, pen)
    theta = np.zeros((p, p))

    singles = [c[0] for c in part.components if len(c) == 1]
    if singles:
        idx = np.array(singles)
        theta[idx, idx] = scalar_solution(s[idx, idx], pen)

    blocks = [(b, c) for b, c in enumerate(part.components) if len(c) > 1]

    def run(item):
        b, nodes = item
        sub = s[np.ix_(nodes, nodes)]
        bcfg = _block_config(cfg, b)
        if bcfg is not None and getattr(bcfg, "theta0", None) is not None:
            bcfg = replace(bcfg, theta0=np.asarray(bcfg.theta0)[np.ix_(nodes, nodes)])
        try:
            return solve(sub, pen, bcfg)
        except PrecmatError as exc:
            raise BlockSolveError(b, nodes, exc) from exc

    n_workers = min(workers or default_workers(), max(1, len(blocks)))
    if n_workers > 1:
        with ThreadPoolExecutor(n_workers) as pool:
            results = list(pool.map(run, blocks))
    else:
        results = [run(item) for item in blocks]

    trace: list[TraceRecord] = []
    iterations = restarts = 0
    converged = True
    offset = 0
    t_offset = 0.0
    for (b, nodes), res in zip(blocks, results):
        theta[np.ix_(nodes, nodes)] = res.theta_hat
        iterations = max(iterations, res.iterations)
        restarts += res.restarts
        converged &= res.converged
        for r in res.trace:
            trace.append(replace(r, iter=r.iter + offset, elapsed_s=r.elapsed_s + t_offset))
        offset += res.iterations + 1
        t_offset += res.elapsed_s
    theta = mirror_lower(theta)
    return SolveResult(
        theta_hat=theta,
        iterations=iterations,
        restarts=restarts,
        converged=converged,
        trace=trace,
        kkt_residual=kkt_residual(theta, s, pen),
        objective=objective(theta, s, pen),
        elapsed_s=sum(r.elapsed_s for r in results),
    )
