import pytest

from adic_lab import Diagram, EdgeOrdering, odometer, stationary_diagram


@pytest.fixture
def running():
    """Root column (1, 2) followed by the stationary matrix [[2, 1], [1, 2]]."""
    return stationary_diagram([1, 2], [[2, 1], [1, 2]])


@pytest.fixture
def odo23():
    return odometer([2, 3], depth=10)


@pytest.fixture
def odo23_order(odo23):
    return EdgeOrdering.left_to_right(odo23)


def diagram(levels, stationary=False):
    return Diagram(levels, stationary=stationary)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
