"""Collects the acceptance outcomes and prints one line per criterion."""

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or report.failed:
        detail = dict(report.user_properties).get("detail", "")
        prev = _ACCEPTANCE.get(report.nodeid)
        if prev is None or report.failed:
            _ACCEPTANCE[report.nodeid] = (report.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, (ok, detail) in _ACCEPTANCE.items():
        name = nodeid.split("::")[-1]
        line = f"{'PASS' if ok else 'FAIL'}  {name}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))
