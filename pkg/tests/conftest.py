import pytest

_ACCEPTANCE = []


@pytest.fixture
def acceptance_log():
    """Record one criterion outcome; the lines are echoed in the terminal summary."""

    def record(number, title, ok, detail=""):
        line = f"criterion {number:2d} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
        _ACCEPTANCE.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
