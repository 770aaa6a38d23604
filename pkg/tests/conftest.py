"""Shared test plumbing: the acceptance suite reports one PASS/FAIL line
per criterion, echoed in a summary section at the end of the run."""

import pytest

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def criterion():
    """criterion(num, ok, detail): record and assert one criterion."""

    def report(num, ok, detail):
        line = f"criterion {num:02d} {'PASS' if ok else 'FAIL'} - {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
