import pytest

from qiso.metric_space import parse_standard_name

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def spaces():
    names = ["simplex(2)", "simplex(3)", "simplex(4)", "square", "rectangle(1,4)", "hypercube(3)",
             "cycle_graph(4)", "cycle_graph(5)"]
    return {name: parse_standard_name(name) for name in names}


@pytest.fixture
def square():
    return parse_standard_name("square")


@pytest.fixture
def rectangle():
    return parse_standard_name("rectangle(1,4)")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
