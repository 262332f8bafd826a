import pytest

RESULT_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if RESULT_LINES:
        terminalreporter.section("acceptance criteria")
        for line in RESULT_LINES:
            terminalreporter.write_line(line)
