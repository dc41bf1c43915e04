import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from precmat.data import (
    DatasetMatrix,
    generate_synthetic,
    read_matrix,
    read_trace,
    sample_covariance,
    write_matrix,
    write_trace,
)
from precmat.det import DetSolverConfig, solve_deterministic
from precmat.errors import DimensionMismatch, NotSymmetric, ParseError
from precmat.linalg import cholesky, extreme_eigenvalues
from precmat.penalty import ElasticNetPenalty


def test_sample_covariance_examples():
    np.testing.assert_array_equal(sample_covariance(np.eye(2)), 0.5 * np.eye(2))
    # x^T x / n with n = 1 keeps the square of the entry
    np.testing.assert_array_equal(sample_covariance(np.array([[2.0, 0.0]])), [[4, 0], [0, 0]])
    x = np.tile([1.0, -2.0, 3.0], (4, 1))
    np.testing.assert_array_equal(sample_covariance(x, center=True), np.zeros((3, 3)))


@given(st.integers(1, 30), st.integers(1, 10), st.integers(0, 10**6))
def test_sample_covariance_psd(n, p, seed):
    x = np.random.default_rng(seed).standard_normal((n, p))
    s = sample_covariance(DatasetMatrix(x))
    assert np.array_equal(s, s.T)
    assert extreme_eigenvalues(s)[0] >= -1e-10


@given(st.integers(2, 60), st.floats(0.1, 3.0), st.integers(0, 10**6))
def test_synthetic_smallest_eigenvalue(p, ell, seed):
    prob = generate_synthetic(p, ell=ell, seed=seed)
    assert extreme_eigenvalues(prob.theta_star)[0] == pytest.approx(ell, abs=1e-10)


def test_synthetic_density_concentrates():
    prob = generate_synthetic(200, density=10 / 200, seed=3)
    b = prob.theta_star - np.diag(np.diagonal(prob.theta_star))
    assert 0.03 <= np.count_nonzero(b) / (200 * 199) <= 0.07


def test_synthetic_deterministic_and_pd():
    a, b = generate_synthetic(30, seed=5), generate_synthetic(30, seed=5)
    for f in ("theta_star", "s"):
        assert np.array_equal(getattr(a, f), getattr(b, f))
    assert np.array_equal(a.x.values, b.x.values)
    assert a.x.n == 15
    for p in (20, 50, 100):
        for seed in range(50):
            cholesky(generate_synthetic(p, seed=seed).theta_star)


def test_csv_identity(tmp_path):
    f = tmp_path / "s.csv"
    f.write_text("1,0\n0,1\n")
    np.testing.assert_array_equal(read_matrix(f), np.eye(2))


def test_csv_header_skipped(tmp_path):
    f = tmp_path / "s.csv"
    f.write_text("a,b\n2,1\n1,2\n")
    np.testing.assert_array_equal(read_matrix(f, header=True), [[2, 1], [1, 2]])


def test_ragged_csv(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("1,2,3\n4,5\n")
    with pytest.raises(ParseError) as info:
        read_matrix(f)
    assert info.value.line == 2


def test_bad_number(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("1,x\n0,1\n")
    with pytest.raises(ParseError) as info:
        read_matrix(f)
    assert (info.value.line, info.value.column) == (1, 2)


def test_asymmetric_rejected(tmp_path):
    f = tmp_path / "s.csv"
    f.write_text("1,0.5\n0.4,1\n")
    with pytest.raises(NotSymmetric):
        read_matrix(f)


def test_non_square_covariance(tmp_path):
    f = tmp_path / "s.csv"
    f.write_text("1,2,3\n4,5,6\n")
    with pytest.raises(DimensionMismatch):
        read_matrix(f)
    assert read_matrix(f, kind="data").values.shape == (2, 3)


def test_binary_round_trip(tmp_path, rng):
    a = rng.standard_normal((16, 16))
    write_matrix(DatasetMatrix(a), tmp_path / "a.bin")
    assert np.array_equal(read_matrix(tmp_path / "a.bin", kind="data").values, a)
    s = a + a.T
    write_matrix(s, tmp_path / "s.pmat")
    assert np.array_equal(read_matrix(tmp_path / "s.pmat"), s)


def test_binary_truncated(tmp_path, rng):
    write_matrix(np.eye(4), tmp_path / "s.bin")
    raw = (tmp_path / "s.bin").read_bytes()
    (tmp_path / "s.bin").write_bytes(raw[:-8])
    with pytest.raises(DimensionMismatch):
        read_matrix(tmp_path / "s.bin")


def test_csv_round_trip_exact(tmp_path, rng):
    a = rng.standard_normal((5, 5))
    a = a + a.T
    write_matrix(a, tmp_path / "a.csv")
    assert np.array_equal(read_matrix(tmp_path / "a.csv"), a)
    assert not list(tmp_path.glob(".*tmp"))


@pytest.mark.parametrize("name", ["t.csv", "t.jsonl"])
def test_trace_round_trip(tmp_path, name):
    prob = generate_synthetic(10, seed=1)
    res = solve_deterministic(prob.s, ElasticNetPenalty(0.1, 0.9), DetSolverConfig(gamma0=10.0), reference=prob.theta_star)
    write_trace(res, tmp_path / name)
    back = read_trace(tmp_path / name)
    assert len(back) == len(res.trace)
    for a, b in zip(back, res.trace):
        assert (a.iter, a.objective, a.nnz, a.rel_error) == (b.iter, b.objective, b.nnz, b.rel_error)
    assert math.isnan(back[0].rel_change)
    iters = [r.iter for r in back]
    times = [r.elapsed_s for r in back]
    assert iters == sorted(iters) and times == sorted(times)
