import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from madelung.field_core import PeriodicGrid

settings.register_profile(
    "default",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def grid():
    return PeriodicGrid(128)


@pytest.fixture
def small_grid():
    return PeriodicGrid(64)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one summary line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[criterion])
