import numpy as np
import pytest

from wfrechet.datagen import generate_zinbinom_qf

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def sim_defaults():
    """n=100, m=100, p=10 simulation with seed 1."""
    return generate_zinbinom_qf(100, 100, 10, seed=1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
