import pytest

# one line per acceptance criterion, printed after the run
CRITERIA_LINES = []


def record(line: str):
    CRITERIA_LINES.append(line)
    print(line)


@pytest.fixture
def crit():
    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA_LINES:
            terminalreporter.write_line(line)
