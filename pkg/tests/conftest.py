import hypothesis
import numpy as np
import pytest

from geokp.dist import step_from_left_tail, step_from_right_tail
from geokp.tandem import TandemParams, build_step

hypothesis.settings.register_profile("default", max_examples=40, deadline=None)
hypothesis.settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture
def gr1():
    return step_from_right_tail(0.4, 0.5, {-1: 0.6})


@pytest.fixture
def left1():
    return step_from_left_tail(0.7, 0.6, {1: 0.15, 3: 0.15})


@pytest.fixture
def left2():
    return step_from_left_tail(0.6, 0.7, {1: 0.2, 2: 0.1, 3: 0.1})


@pytest.fixture(scope="session")
def tandem_params():
    return TandemParams(1.0, 0.3, 0.5)


@pytest.fixture(scope="session")
def tandem_step(tandem_params):
    return build_step(tandem_params)[0]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
