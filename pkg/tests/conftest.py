import pytest

_acceptance: list[tuple[str, str, str]] = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        detail = dict(report.user_properties).get("detail", "")
        _acceptance.append((name, "PASS" if report.passed else "FAIL", detail))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, outcome, detail in _acceptance:
        terminalreporter.write_line(f"{outcome}  {name}  {detail}".rstrip())


@pytest.fixture
def detail(record_property):
    """Attach a one-line measurement to the acceptance report."""
    def _record(text):
        record_property("detail", text)
    return _record
