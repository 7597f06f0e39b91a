import pytest

_LINES = []


@pytest.fixture
def acceptance_report():
    """Record (and echo) one pass/fail line per acceptance criterion."""
    def record(number, ok, detail, elapsed, budget):
        timing = f"{elapsed:.1f}s" + (f" of {budget:g}s" if budget else "")
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}  [{timing}]"
        _LINES.append((number, line))
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_LINES):
            terminalreporter.write_line(line)
