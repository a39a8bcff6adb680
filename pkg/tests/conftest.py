import numpy as np
import pytest

from anticanon.family import OperatorFamily
from anticanon.oracle import build_worked_example

SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]])
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)


@pytest.fixture
def pauli_pair():
    return OperatorFamily((SIGMA1, SIGMA2), ("s1", "s2"))


@pytest.fixture(scope="session")
def worked_family():
    return build_worked_example()


def random_diagonalizable(rng, n, cond=100.0, values=None):
    """S diag S^-1 with cond(S) exactly ``cond``; returns (M, values, S)."""
    from anticanon.oracle import random_conjugator

    S = random_conjugator(n, cond, rng)
    if values is None:
        values = rng.integers(-4, 5, size=n).astype(complex)
    return S @ np.diag(values) @ np.linalg.inv(S), values, S


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
