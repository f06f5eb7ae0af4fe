import numpy as np
import pytest

from chanpred.pipeline import sliding_window_average
from chanpred.synthetic import SyntheticParams, generate_trace

_ACCEPTANCE_LINES = []


def record_acceptance(line):
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def default_trace():
    """Default synthetic trace (3000 points, sigma=4 dB), 40-wavelength smoothed."""
    return sliding_window_average(generate_trace(SyntheticParams(seed=0)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
