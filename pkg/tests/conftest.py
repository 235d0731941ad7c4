import pytest

_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Record and print one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(number: int, title: str, ok: bool, detail: str = "") -> None:
        line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {title}" + (f" -- {detail}" if detail else "")
        _LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
