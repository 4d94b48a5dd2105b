import pytest

from cholfill import assemble, get_problem, uniform_mesh


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run N=512 factorizations")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def uniform_system():
    def build(N, eps, problem="ones"):
        mesh = uniform_mesh(N)
        return assemble(mesh, mesh, get_problem(problem, eps))

    return build


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""

    def record(name, passed, detail="", gating=True):
        tag = ("PASS" if passed else "FAIL") if gating else "REPORT"
        ACCEPTANCE_LINES.append(f"[{tag}] {name}: {detail}")
        print(ACCEPTANCE_LINES[-1])
        if gating:
            assert passed, detail

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
