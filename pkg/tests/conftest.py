from collections import defaultdict

import pytest

_criteria: dict = defaultdict(lambda: {"title": "", "outcomes": []})


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    if report.when == "call" or report.outcome != "passed":
        number, title = marker
        entry = _criteria[number]
        entry["title"] = title
        entry["outcomes"].append((report.nodeid.split("::")[-1], report.outcome))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        report.criterion = m.args


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        failed = [name for name, o in entry["outcomes"] if o != "passed"]
        status = "FAIL" if failed else "PASS"
        line = f"criterion {number}: {status}  {entry['title']}"
        if failed:
            line += f"  (failing: {', '.join(failed)})"
        tr.write_line(line)
