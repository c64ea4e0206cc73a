import numpy as np
import pytest


def random_state(rng, n, complex_=True):
    x = rng.normal(size=n)
    if complex_:
        x = x + 1j * rng.normal(size=n)
    return x / np.linalg.norm(x)


def random_unitary(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


# frozen reference states
EX4 = np.sqrt([0.50, 0.25, 0.15, 0.10])
ELLK = np.array([0.9, 0.3, np.sqrt(0.1)])
ELL1 = np.sqrt([0.5, 0.3, 0.2])
MIDDLE = np.array([0.8, 0.36, 0.3, 0.2, np.sqrt(1 - 0.64 - 0.1296 - 0.09 - 0.04)])


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
