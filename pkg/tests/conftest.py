import pytest

from descomp.structures import graph

# Lines collected by test_acceptance.py, echoed after the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def p3():
    return graph(3, [(0, 1), (1, 2)])


@pytest.fixture
def p3_plus():
    """P3 with an extra isolated vertex 3."""
    return graph(4, [(0, 1), (1, 2)])
