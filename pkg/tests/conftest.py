import pytest

_criteria: dict[int, dict] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    number, title = mark.args
    entry = _criteria.setdefault(number, {"title": title, "passed": True,
                                          "ran": False, "notes": []})
    if report.when == "call" or report.failed:
        entry["ran"] = True
        entry["passed"] &= report.passed
    if report.when == "call":
        entry["notes"] += [v for k, v in item.user_properties if k == "note"]


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        e = _criteria[number]
        status = "PASS" if e["ran"] and e["passed"] else "FAIL"
        terminalreporter.write_line(f"{status} criterion {number}: {e['title']}")
        for note in e["notes"]:
            terminalreporter.write_line(f"    {note}")
