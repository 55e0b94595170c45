"""Shared fixtures: closed-form generators, schedules and maps."""

import math

import pytest

from loewner_lab.config import SolverConfig
from loewner_lab.evolution import Schedule
from loewner_lab.generators import Generator
from loewner_lab.herglotz import ClarkMeasure, HerglotzFunction


def hyperbolic_generator(c: float = 1.0) -> Generator:
    """G(z) = c (1 - z^2)/2: Denjoy-Wolff point 1, repelling fixed point -1."""
    return Generator(1.0 + 0j, HerglotzFunction(ClarkMeasure(((1.0 + 0j, c / 2.0),))))


def contraction_generator() -> Generator:
    """G(z) = -z."""
    return Generator(0j, HerglotzFunction(ClarkMeasure((), 1.0)))


@pytest.fixture
def solver():
    return SolverConfig(rel_tol=1e-9, abs_tol=1e-9)


@pytest.fixture
def precise_solver():
    return SolverConfig(rel_tol=1e-12, abs_tol=1e-12)


@pytest.fixture
def hyperbolic():
    return hyperbolic_generator()


@pytest.fixture
def contraction():
    return contraction_generator()


@pytest.fixture
def two_segment_schedule():
    """[(0.5, -w), (0.5, (1 - w^2)/2)]."""
    return Schedule.of((0.5, contraction_generator()), (0.5, hyperbolic_generator()))


@pytest.fixture
def two_segment_value():
    """phi_{0,1}(0.5) of the two-segment schedule from the closed forms."""
    middle = 0.5 * math.exp(-0.5)
    return math.tanh(0.25 + math.atanh(middle))
