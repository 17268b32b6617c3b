import pytest

# lines recorded by tests/test_acceptance.py, printed after the run
ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_record():
    def record(number, title, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {title} -- {detail}"
        ACCEPTANCE_LINES.append((number, line))
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
