import re

_CRITERIA: dict[int, tuple[str, float]] = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::.*test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _CRITERIA[n] = ("PASS" if report.passed else "FAIL", report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        status, secs = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {status} ({secs:.2f} s)")
