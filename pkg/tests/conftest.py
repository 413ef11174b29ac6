from __future__ import annotations

from collections import OrderedDict

import pytest

from plancherel import rsk

MC_N = 100_000
MC_COUNT = 10_000
MC_SEED = 20240601

_criteria: "OrderedDict[int, dict]" = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.fixture(scope="session")
def desk_scale_samples():
    """First- and second-row scaled samples at ``N = 1e5`` from one permutation set."""
    return rsk.sample_both(MC_N, MC_COUNT, MC_SEED)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _criteria.setdefault(number, {"title": title, "tests": [], "failed": []})
    if report.when == "call" or (report.when == "setup" and not report.passed):
        entry["tests"].append(item.nodeid)
        if not report.passed:
            entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        status = "FAIL" if entry["failed"] else "PASS"
        line = f"criterion {number:2d} {status}  {entry['title']}"
        if entry["failed"]:
            line += f"  (failed: {', '.join(entry['failed'])})"
        terminalreporter.write_line(line)
