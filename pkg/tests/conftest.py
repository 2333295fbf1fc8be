import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def record():
    """Log one pass/fail line per acceptance criterion."""

    def _record(number, name, ok, detail=""):
        line = f"[criterion {number}] {'PASS' if ok else 'FAIL'} {name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
