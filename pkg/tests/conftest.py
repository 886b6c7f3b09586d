import numpy as np
import pytest

from kerntract.quadrature import gauss_hermite


@pytest.fixture(scope="session")
def rule80():
    return gauss_hermite(80)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
