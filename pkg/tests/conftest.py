import numpy as np
import pytest

from svexner.model import FieldState
from svexner.presets import hump


@pytest.fixture
def lake_field():
    """Quiescent water over a submerged Gaussian hump, H0 = 1."""
    def make(M=60, n_ghost=1, H0=1.0, eta_max=0.2):
        dx = 20.0 / M
        x = -10.0 + (np.arange(M) + 0.5) * dx
        eta = hump(x, eta_max)
        return FieldState.from_interior(H0 - eta, np.zeros(M), eta, dx, -10.0, n_ghost)
    return make


def periodic_smooth_field(M, n_ghost, seed=0, L=10.0):
    rng = np.random.default_rng(seed)
    dx = L / M
    x = (np.arange(M) + 0.5) * dx
    k = 2 * np.pi / L
    a = rng.uniform(0.02, 0.08, size=3)
    ph = rng.uniform(0, 2 * np.pi, size=3)
    h = 1.0 + a[0] * np.sin(k * x + ph[0])
    q = 0.3 + a[1] * np.sin(2 * k * x + ph[1])
    eta = 0.5 + 0.1 * np.sin(k * x + ph[2]) * a[2] / 0.08
    return FieldState.from_interior(h, q, eta, dx, 0.0, n_ghost)


_ACCEPTANCE: dict = {}


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""
    def record(n, ok, detail):
        _ACCEPTANCE[n] = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(_ACCEPTANCE[n])
        assert ok, detail
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])
