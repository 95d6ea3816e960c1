import pytest

_LINES = []


@pytest.fixture
def criterion_report():
    """Record one PASS/FAIL line per acceptance criterion."""
    def emit(line):
        print(line)
        _LINES.append(line)
    return emit


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
