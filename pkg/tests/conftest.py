import pytest

ACCEPTANCE_LINES = {}


def record(n, ok, detail):
    ACCEPTANCE_LINES[n] = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(ACCEPTANCE_LINES[n])
    return ok


@pytest.fixture
def acceptance():
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
