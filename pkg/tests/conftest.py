"""Prints one PASS/FAIL line per acceptance criterion after the run."""

_ACCEPTANCE_RESULTS: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1].removeprefix("test_").replace("_", "-")
    detail = ""
    for key, value in report.user_properties:
        if key == "acceptance":
            name, detail = value
    _ACCEPTANCE_RESULTS[name] = (report.outcome, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria:")
    for name, (outcome, detail) in _ACCEPTANCE_RESULTS.items():
        status = "PASS" if outcome == "passed" else "FAIL"
        suffix = f" ({detail})" if detail else ""
        terminalreporter.write_line(f"  ACCEPTANCE {name}: {status}{suffix}")
