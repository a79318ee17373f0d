from __future__ import annotations

from collections import defaultdict

import pytest

_criteria: dict[int, dict] = defaultdict(lambda: {"title": "", "outcomes": [], "duration": 0.0})


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        entry = _criteria[marker.args[0]]
        entry["title"] = marker.args[1]
        entry["outcomes"].append(rep.outcome)
        entry["duration"] += rep.duration


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        ok = all(o == "passed" for o in entry["outcomes"])
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"{status}  criterion {number:2d}: {entry['title']} ({entry['duration']:.2f}s)")
