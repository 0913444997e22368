from fractions import Fraction

import pytest

from polyfalconer.cantor import build_stages, make_schedule
from polyfalconer.polynorm import Slope, default_slopes, from_slopes
from polyfalconer.sepset import LatticeSpec, build_lattice_set, sample_good_set

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def square_norm():
    return from_slopes([Slope.infinity(), Slope.of(0)])


@pytest.fixture(scope="session")
def square_set(square_norm):
    return build_lattice_set(square_norm, LatticeSpec(2, 2, (Fraction(1), Fraction(1))))


@pytest.fixture(scope="session")
def square_stages(square_set):
    sched = make_schedule(2, [square_set, square_set])
    return sched, build_stages(sched, 2)


@pytest.fixture(scope="session")
def k4_norm():
    return from_slopes(default_slopes(4))


@pytest.fixture(scope="session")
def k4_set(k4_norm):
    return sample_good_set(k4_norm, 4, 2, Fraction(0), 100, 7)[1]


@pytest.fixture(scope="session")
def k4_stages(k4_set):
    sched = make_schedule(4, [k4_set] * 3)
    return sched, build_stages(sched, 3)
