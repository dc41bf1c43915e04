import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_spd(p, rng, floor=0.1):
    a = rng.standard_normal((p, p))
    return a @ a.T / p + floor * np.eye(p)


def random_psd(p, rng, n=None):
    x = rng.standard_normal((n or 2 * p, p))
    return x.T @ x / x.shape[0]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def brute_prox_scalar(t, gamma, lam1, lam2):
    """Minimize ``lam1*|u| + lam2*u**2 + (u - t)**2/(2*gamma)`` numerically.

    A dense grid brackets the minimizer; bisection on the (monotone)
    subgradient then pins it down. Comparing objective values alone cannot
    resolve the minimizer past about ``sqrt(eps)``.
    """
    r = abs(t) + 1.0
    grid = np.linspace(-r, r, 4001)
    vals = lam1 * np.abs(grid) + lam2 * grid**2 + (grid - t) ** 2 / (2.0 * gamma)
    i = int(np.argmin(vals))
    if grid[i] == 0.0 or np.sign(grid[max(i - 1, 0)]) != np.sign(grid[min(i + 1, 4000)]):
        # bracket straddles the kink: zero is optimal iff 0 lies in the subdifferential
        if abs(t) / gamma <= lam1:
            return 0.0
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, 4000)]

    def right_slope(u):
        return lam1 * (1.0 if u >= 0 else -1.0) + 2 * lam2 * u + (u - t) / gamma

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if right_slope(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def pytest_configure(config):
    config.acceptance_lines = []


@pytest.fixture
def acceptance(request):
    """Record one ``criterion N: PASS|FAIL`` line; all lines are repeated in the terminal summary."""

    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        request.config.acceptance_lines.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split(":")[0].split()[-1])):
            terminalreporter.write_line(line)
