import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []


def random_channels(rng, K, M, scale=1e-4):
    H = (rng.normal(size=(M + 1, K)) + 1j * rng.normal(size=(M + 1, K))) * scale
    return H


@pytest.fixture
def rng():
    return np.random.default_rng(20251015)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
