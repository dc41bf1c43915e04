import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from conftest import random_spd
from precmat.det import DetSolverConfig, solve_deterministic
from precmat.penalty import ElasticNetPenalty, scalar_solution
from precmat.stochastic import StochConfig
from precmat.threshold import (
    UnionFind,
    solve_blockwise,
    support_components,
    threshold_components,
)

TIGHT = DetSolverConfig(gamma0=10.0, rel_tol=1e-13, max_iters=20000)


def scipy_partition(s, cut):
    adj = np.abs(s) > cut
    np.fill_diagonal(adj, False)
    _, lab = connected_components(csr_matrix(adj), directed=False)
    return {frozenset(np.flatnonzero(lab == c).tolist()) for c in np.unique(lab)}


def test_diagonal_gives_singletons():
    part = threshold_components(np.diag([1.0, 2, 3, 4]), ElasticNetPenalty(0.5, 0.5))
    assert part.components == [[0], [1], [2], [3]]


def test_transitive_component():
    s = np.array([[1.0, 0.9, 0.1], [0.9, 1.0, 0.8], [0.1, 0.8, 1.0]])
    assert threshold_components(s, ElasticNetPenalty(0.5, 1.0)).components == [[0, 1, 2]]


def test_single_edge():
    s = np.array([[1.0, 0.9, 0.1], [0.9, 1.0, 0.0], [0.1, 0.0, 1.0]])
    assert threshold_components(s, ElasticNetPenalty(0.5, 1.0)).components == [[0, 1], [2]]


def test_tie_is_not_an_edge():
    s = np.array([[1.0, 0.5], [0.5, 1.0]])
    assert threshold_components(s, ElasticNetPenalty(0.5, 1.0)).components == [[0], [1]]


@given(st.integers(1, 25), st.floats(0.0, 1.0), st.integers(0, 10**6))
def test_matches_scipy_components(p, cut, seed):
    rng = np.random.default_rng(seed)
    s = rng.uniform(-1, 1, (p, p))
    s = (s + s.T) / 2
    part = threshold_components(s, ElasticNetPenalty(cut, 1.0))
    assert part.as_sets() == scipy_partition(s, cut)
    flat = sorted(i for c in part.components for i in c)
    assert flat == list(range(p))
    lab = part.labels(p)
    i, j = np.nonzero(np.abs(s) > cut)
    assert np.all(lab[i] == lab[j])


def test_union_find_basics():
    uf = UnionFind(5)
    assert uf.union(0, 3) and uf.union(3, 4) and not uf.union(0, 4)
    assert uf.groups() == [[0, 3, 4], [1], [2]]


def test_single_component_same_as_plain(rng):
    s = random_spd(8, rng, floor=0.5)
    s[np.abs(s) < 0.3] = 0.3
    pen = ElasticNetPenalty(0.1, 0.9)
    assert len(threshold_components(s, pen).components) == 1
    a = solve_blockwise(s, pen, "det", TIGHT).theta_hat
    b = solve_deterministic(s, pen, TIGHT).theta_hat
    np.testing.assert_array_equal(a, b)


def test_diagonal_closed_form():
    d = np.linspace(0.5, 5.0, 10)
    pen = ElasticNetPenalty(1.0, 0.9)
    theta = solve_blockwise(np.diag(d), pen).theta_hat
    np.testing.assert_allclose(np.diagonal(theta), scalar_solution(d, pen), rtol=1e-14)
    assert np.count_nonzero(theta - np.diag(np.diagonal(theta))) == 0


def _two_blocks(rng, m=20):
    a, b = random_spd(m, rng, floor=0.2), random_spd(m, rng, floor=0.2)
    s = np.zeros((2 * m, 2 * m))
    s[:m, :m], s[m:, m:] = a + 0.5, b + 0.5
    cross = rng.uniform(-0.04, 0.04, (m, m))
    s[:m, m:], s[m:, :m] = cross, cross.T
    return s


def test_two_blocks_match_full_solve(rng):
    s = _two_blocks(rng)
    pen = ElasticNetPenalty(0.05, 0.9)
    part = threshold_components(s, pen)
    assert part.sizes == [20, 20]
    full = solve_deterministic(s, pen, TIGHT).theta_hat
    res = solve_blockwise(s, pen, "det", TIGHT, workers=2)
    assert np.linalg.norm(res.theta_hat - full) / np.linalg.norm(full) <= 1e-8
    # assembled cross-block entries are exact zeros
    assert np.all(res.theta_hat[:20, 20:] == 0)
    times = [r.elapsed_s for r in res.trace]
    assert times == sorted(times)


@settings(max_examples=50)
@given(st.integers(2, 30), st.floats(0.05, 0.6), st.integers(0, 10**6))
def test_support_components_equal_threshold_components(p, lam, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((2 * p, p))
    s = x.T @ x / (2 * p)
    pen = ElasticNetPenalty(lam, 0.9)
    theta = solve_deterministic(s, pen, TIGHT).theta_hat
    assert support_components(theta).as_sets() == threshold_components(s, pen).as_sets()


def test_permutation_invariance(rng):
    s = _two_blocks(rng, 10)
    pen = ElasticNetPenalty(0.05, 0.9)
    perm = rng.permutation(20)
    a = solve_blockwise(s, pen, "det", TIGHT).theta_hat
    b = solve_blockwise(s[np.ix_(perm, perm)], pen, "det", TIGHT).theta_hat
    np.testing.assert_allclose(b, a[np.ix_(perm, perm)], atol=1e-10)


def test_stochastic_blocks_reproducible(rng):
    s = _two_blocks(rng, 8)
    pen = ElasticNetPenalty(0.05, 0.9)
    cfg = StochConfig(seed=3, max_iters=20)
    a = solve_blockwise(s, pen, "stoch", cfg, workers=2).theta_hat
    b = solve_blockwise(s, pen, "stoch", cfg, workers=1).theta_hat
    assert np.array_equal(a, b)


def test_unknown_solver():
    with pytest.raises(ValueError):
        solve_blockwise(np.eye(2), ElasticNetPenalty(1.0, 1.0), "newton")
