import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_ACCEPTANCE_FILE = "test_acceptance.py"
_details: dict[str, str] = {}
_outcomes: dict[str, str] = {}


@pytest.fixture
def report(request):
    """Attach a one-line measurement to the running acceptance test."""

    def _report(detail: str) -> None:
        _details[request.node.nodeid] = detail

    return _report


def pytest_runtest_logreport(report):
    if _ACCEPTANCE_FILE not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _outcomes[report.nodeid] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, outcome in _outcomes.items():
        name = nodeid.split("::")[-1]
        detail = _details.get(nodeid, "no measurement recorded")
        terminalreporter.write_line(f"{outcome} {name}: {detail}")
