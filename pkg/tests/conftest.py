import sys
from pathlib import Path

import pytest

from gqe.fixtures import load_document, load_graph

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _CRITERIA[number] = (title, rep.outcome, rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_CRITERIA):
        title, outcome, duration = _CRITERIA[number]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d}  {verdict}  {duration:7.2f}s  {title}")


@pytest.fixture
def fig1a():
    return load_graph("fig1a")


@pytest.fixture
def fig1b():
    return load_graph("fig1b")


@pytest.fixture
def fig1c():
    return load_graph("fig1c")


@pytest.fixture
def fig2():
    return load_graph("fig2")


@pytest.fixture
def fig2_gnn():
    from gqe.neural import Gnn

    return Gnn.from_dict(load_document("fig2-gnn"))


@pytest.fixture
def fig3():
    from gqe.xai import DecisionModel

    return DecisionModel.from_dict(load_document("fig3"))
