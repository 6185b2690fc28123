import pytest

_criterion_lines: list[str] = []


@pytest.fixture
def criterion_report():
    """Record one PASS/FAIL line per acceptance criterion; the lines are
    replayed in the terminal summary so they survive output capture."""

    def record(name: str, ok: bool, detail: str) -> str:
        line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
        _criterion_lines.append(line)
        print(line)
        return line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in _criterion_lines:
            terminalreporter.write_line(line)
