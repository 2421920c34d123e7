import re
import time

import pytest

SUITE_BUDGET_S = 300.0

_started = time.perf_counter()
_criteria = {}  # number -> [title, outcome]


def pytest_collection_modifyitems(items):
    for item in items:
        m = re.match(r"test_criterion_(\d+)_", item.name)
        if m and item.module.__name__.endswith("test_acceptance"):
            doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
            _criteria[int(m.group(1))] = [doc, None]
            item.user_properties.append(("criterion", int(m.group(1))))


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    num = props.get("criterion")
    if num is None:
        return
    entry = _criteria[num]
    if report.failed:
        entry[1] = "FAIL"
    elif report.when == "call" and entry[1] is None:
        entry[1] = "PASS" if report.passed else "SKIP"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    elapsed = time.perf_counter() - _started
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_criteria):
        title, outcome = _criteria[num]
        tr.write_line(f"criterion {num:2d}: {outcome or 'NOT RUN':7s} {title}")
    verdict = "PASS" if elapsed < SUITE_BUDGET_S else "FAIL"
    tr.write_line(f"suite runtime: {verdict} {elapsed:.1f} s (budget {SUITE_BUDGET_S:.0f} s)")


def pytest_sessionfinish(session, exitstatus):
    if time.perf_counter() - _started >= SUITE_BUDGET_S and exitstatus == 0:
        session.exitstatus = pytest.ExitCode.TESTS_FAILED
