import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def report_criterion():
    """Record one pass/fail line per acceptance criterion for the terminal summary."""

    def record(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
