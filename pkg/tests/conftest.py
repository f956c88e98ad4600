import numpy as np
import pytest

from bilinear_gramian import io


@pytest.fixture(scope="session")
def ex3():
    return io.load_system(io.fixture_path("example3.json"))


@pytest.fixture(scope="session")
def ex4_lib():
    return io.load_library(io.fixture_path("example4_library.json"))


@pytest.fixture
def rng():
    return np.random.default_rng(20151215)


def fixed_point_gramian(sys, iters=20000, tol=1e-15):
    """Independent oracle: iterate W <- A W A^T + sum F W F^T + B B^T from W = 0."""
    W = np.zeros((sys.n, sys.n))
    Q = sys.B @ sys.B.T
    for _ in range(iters):
        Wn = sys.A @ W @ sys.A.T + Q + sum(F @ W @ F.T for F in sys.F)
        if np.max(np.abs(Wn - W)) <= tol * max(1.0, np.max(np.abs(Wn))):
            return Wn
        W = Wn
    return W


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    """Collects one (number, passed, detail) entry per acceptance criterion."""
    return request.config.stash.setdefault(_ACCEPTANCE_KEY, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    entries = config.stash.get(_ACCEPTANCE_KEY, [])
    if not entries:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(entries):
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
