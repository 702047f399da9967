import pytest

from schro.ground_state import default_grid, solve_ground_state

_GS = {}

# acceptance lines collected by test_acceptance.py
ACCEPTANCE_LINES = []


def ground_state(dim):
    if dim not in _GS:
        _GS[dim] = solve_ground_state(default_grid(dim))
    return _GS[dim]


@pytest.fixture(scope="session")
def gs1():
    return ground_state(1)


@pytest.fixture(scope="session")
def gs2():
    return ground_state(2)


@pytest.fixture(scope="session")
def gs3():
    return ground_state(3)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
