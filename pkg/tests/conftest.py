import sys
from fractions import Fraction as F

import numpy as np
import pytest

from seqdyn import build_example_fig1, build_normal_form, build_sequence_form, random_game


@pytest.fixture(scope="session")
def fig1():
    return build_example_fig1()


@pytest.fixture(scope="session")
def fig1_sf(fig1):
    return build_sequence_form(fig1)


@pytest.fixture(scope="session")
def fig1_nf(fig1):
    return build_normal_form(fig1, reduced=True)


@pytest.fixture
def example_x1():
    # agent 1 mixes L1 / R1L2R3 / R1R2R3 evenly
    return np.array([float(v) for v in (1, F(1, 3), F(2, 3), F(1, 3), F(1, 3), 0, F(2, 3))])


@pytest.fixture
def example_x2():
    return np.array([1.0, 1.0, 0.0])


@pytest.fixture
def example_pi1():
    return np.array([1 / 3, 0.0, 1 / 3, 0.0, 1 / 3])


@pytest.fixture(scope="session")
def small_games():
    """A fixed batch of random games, some with imperfect information."""
    return [
        random_game(depth=1 + s % 4, branching=2 + s % 2, merge=0.5 if s % 3 else 0.0, seed=s)
        for s in range(12)
    ]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
