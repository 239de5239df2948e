"""Acceptance bookkeeping: one pass/fail line per criterion in the summary."""

import time

import pytest

SUITE_BUDGET_S = 30.0
_results: dict[int, list] = {}
_start = [0.0]


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_sessionstart(session):
    _start[0] = time.perf_counter()


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    number, title = marker.args
    detail = getattr(item, "acceptance_detail", "")
    if report.failed:
        detail = str(call.excinfo.value).splitlines()[0] if call.excinfo else detail
    _results[number] = [title, report.passed, detail]


@pytest.fixture
def detail(request):
    """Let a criterion test attach a one-line summary of what it measured."""

    def record(text: str) -> None:
        request.node.acceptance_detail = text

    return record


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.perf_counter() - _start[0]
    if 9 in _results:
        title, ok, detail = _results[9]
        within = elapsed < SUITE_BUDGET_S
        _results[9] = [title, ok and within, f"{detail}; session {elapsed:.1f} s (budget {SUITE_BUDGET_S:.0f} s)"]
        if not within and session.exitstatus == 0:
            session.exitstatus = pytest.ExitCode.TESTS_FAILED


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        title, ok, detail = _results[number]
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
