import numpy as np
import pytest

from roe_lab.space_core import RadialGrid, SpaceParams


@pytest.fixture(scope="session")
def h3():
    return SpaceParams(3)


@pytest.fixture(scope="session")
def h2():
    return SpaceParams(2)


@pytest.fixture(scope="session")
def transform_grid():
    return RadialGrid(15.0, 1201)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_ball_points(rng, n, count, max_norm=0.9):
    x = rng.normal(size=(count, n))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return x * max_norm * rng.uniform(0.0, 1.0, size=(count, 1)) ** (1.0 / n)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
