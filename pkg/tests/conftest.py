"""Shared pytest config: acceptance-criterion reporting.

Tests marked `@pytest.mark.criterion(N, "...")` contribute to a per-criterion
PASS/FAIL line printed at the end of the run.
"""

import pytest

_results = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(num, description): acceptance criterion this test implements"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when != "call":
        return
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    num, desc = marker.args
    prev_ok, _ = _results.get(num, (True, desc))
    _results[num] = (prev_ok and rep.passed, desc)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_results):
        ok, desc = _results[num]
        terminalreporter.write_line(f"criterion {num:2d} {'PASS' if ok else 'FAIL'}  {desc}")
