from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_spd
from precmat.bounds import compute_bounds
from precmat.data import generate_synthetic
from precmat.det import DetSolverConfig, prox_grad_step, solve_deterministic
from precmat.errors import MaxRestartsExceeded, NonFiniteObjective
from precmat.linalg import extreme_eigenvalues
from precmat.penalty import ElasticNetPenalty, objective

ONE = np.array([[1.0]])
LASSO1 = ElasticNetPenalty(1.0, 1.0)


def test_step_scalar_fixed_point():
    out = prox_grad_step(np.array([[0.5]]), ONE, LASSO1, 0.2)
    assert out[0, 0] == pytest.approx(0.5, abs=1e-15)


def test_step_without_penalty_at_optimum():
    out = prox_grad_step(ONE, ONE, ElasticNetPenalty(0.0, 1.0), 3.0)
    assert out[0, 0] == pytest.approx(1.0)


def test_step_hand_computation():
    out = prox_grad_step(ONE, ONE, LASSO1, 0.25)
    assert out[0, 0] == pytest.approx(0.75)


def test_scalar_solve():
    res = solve_deterministic(ONE, LASSO1, DetSolverConfig(rel_tol=1e-14))
    assert res.converged
    assert res.theta_hat[0, 0] == pytest.approx(0.5, abs=1e-10)
    assert res.kkt_residual <= 1e-10


def test_diagonal_closed_form():
    d = np.linspace(0.5, 5.0, 10)
    pen = ElasticNetPenalty(1.0, 0.9)
    l1, l2 = pen.lambda1, pen.lambda2
    res = solve_deterministic(np.diag(d), pen, DetSolverConfig(gamma0=10.0, rel_tol=1e-13))
    expected = (-(d + l1) + np.sqrt((d + l1) ** 2 + 8 * l2)) / (4 * l2)
    np.testing.assert_allclose(np.diagonal(res.theta_hat), expected, atol=1e-8)
    assert np.count_nonzero(res.theta_hat - np.diag(np.diagonal(res.theta_hat))) == 0


def test_long_run_self_consistency():
    prob = generate_synthetic(20, seed=7)
    pen = ElasticNetPenalty(0.1, 0.9)
    ref = solve_deterministic(prob.s, pen, DetSolverConfig(gamma0=10.0, rel_tol=1e-300, max_iters=2000))
    res = solve_deterministic(prob.s, pen, DetSolverConfig(gamma0=10.0, rel_tol=1e-10))
    assert res.converged
    assert np.linalg.norm(res.theta_hat - ref.theta_hat) <= 1e-8


def _attempts(trace):
    # the step changes only at a restart, which rewinds to the start
    groups = {}
    for r in trace:
        groups.setdefault(r.step, []).append(r.objective)
    return groups.values()


@settings(max_examples=25)
@given(st.integers(2, 12), st.floats(0.02, 1.0), st.floats(0.0, 1.0), st.integers(0, 10**6))
def test_descent_within_each_attempt(p, lam, alpha, seed):
    s = random_spd(p, np.random.default_rng(seed), floor=0.0)
    res = solve_deterministic(s, ElasticNetPenalty(lam, alpha), DetSolverConfig(gamma0=10.0, rel_tol=1e-9))
    for objs in _attempts(res.trace):
        for a, b in zip(objs, objs[1:]):
            assert b <= a + 1e-12 * max(1.0, abs(a))


def test_guaranteed_mode_stays_in_box(rng):
    for _ in range(5):
        s = random_spd(8, rng, floor=0.0)
        pen = ElasticNetPenalty(rng.uniform(0.1, 0.5), rng.uniform(0.3, 1.0))
        b = compute_bounds(s, pen)
        seen = []
        solve_deterministic(
            s,
            pen,
            DetSolverConfig(guaranteed=True, rel_tol=1e-9, max_iters=3000),
            callback=lambda k, th: seen.append(extreme_eigenvalues(th)) and False,
        )
        for lo, hi in seen:
            assert lo >= b.ell_star - 1e-8
            assert hi <= b.psi_star + 1e-8


def test_guaranteed_mode_never_restarts(rng):
    s = random_spd(10, rng, floor=0.0)
    res = solve_deterministic(s, ElasticNetPenalty(0.2, 0.7), DetSolverConfig(guaranteed=True, rel_tol=1e-8))
    assert res.restarts == 0


def test_measured_linear_rate(rng):
    s = random_spd(10, rng, floor=0.0)
    pen = ElasticNetPenalty(0.3, 0.8)
    ref = solve_deterministic(s, pen, DetSolverConfig(gamma0=10.0, rel_tol=1e-300, max_iters=3000)).theta_hat
    its = []
    res = solve_deterministic(
        s, pen, DetSolverConfig(guaranteed=True, rel_tol=1e-12), callback=lambda k, th: its.append(th) and False
    )
    gamma = res.trace[0].step
    psi = max(extreme_eigenvalues(t)[1] for t in its)
    d0 = np.linalg.norm(its[0] - ref) ** 2
    for k, th in enumerate(its):
        assert np.linalg.norm(th - ref) ** 2 <= (1 - gamma / psi**2) ** k * d0 + 1e-20


def test_fixed_point_start():
    prob = generate_synthetic(15, seed=1)
    pen = ElasticNetPenalty(0.1, 0.9)
    cfg = DetSolverConfig(gamma0=1.0, rel_tol=1e-9)
    ref = solve_deterministic(prob.s, pen, replace(cfg, rel_tol=1e-14)).theta_hat
    res = solve_deterministic(prob.s, pen, replace(cfg, theta0=ref))
    assert res.iterations <= 2
    assert res.trace[-1].rel_change <= 1e-9


def test_unpenalized_recovers_inverse(rng):
    s = random_spd(5, rng)
    res = solve_deterministic(s, ElasticNetPenalty(0.0, 1.0), DetSolverConfig(rel_tol=1e-13))
    np.testing.assert_allclose(res.theta_hat, np.linalg.inv(s), atol=1e-8)


def test_restart_limit():
    s = random_spd(6, np.random.default_rng(0))
    with pytest.raises(MaxRestartsExceeded):
        solve_deterministic(s, ElasticNetPenalty(0.1, 0.5), DetSolverConfig(gamma0=1e6, max_restarts=0))


def test_rejects_non_finite():
    with pytest.raises(NonFiniteObjective):
        solve_deterministic(np.array([[np.nan]]), LASSO1)


def test_callback_stops_early():
    prob = generate_synthetic(10, seed=0)
    res = solve_deterministic(prob.s, ElasticNetPenalty(0.1, 0.9), callback=lambda k, th: k >= 3)
    assert res.iterations == 3
    assert not res.converged


def test_trace_fields_and_objective(rng):
    s = random_spd(6, rng)
    pen = ElasticNetPenalty(0.2, 0.5)
    res = solve_deterministic(s, pen, DetSolverConfig(gamma0=10.0), reference=np.eye(6))
    assert res.trace[0].iter == 0
    assert all(r.rel_error is not None for r in res.trace)
    assert res.objective == pytest.approx(objective(res.theta_hat, s, pen))
    times = [r.elapsed_s for r in res.trace]
    assert times == sorted(times)
