import numpy as np
import pytest

from coxjost.model import ChannelModel

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def fig1_model():
    return ChannelModel((0, 15, 25), (-3, -8, -1), ((1, 2, 0.5), (1, 3, 0.4), (2, 3, 1.0)), -81.0)


@pytest.fixture
def fig2_model():
    return ChannelModel((0, 15, 35), (3, 5, 9), ((1, 2, 0.5), (1, 3, 0.4), (2, 3, 0.2)), -1.0)
