import pytest

_LINES: list[tuple[int, str, bool, str]] = []


@pytest.fixture(scope="session")
def criterion_log():
    """Collector for acceptance-criterion verdicts, one entry per criterion."""
    return _LINES


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for num, title, ok, detail in sorted(_LINES):
        verdict = "PASS" if ok else "FAIL"
        line = f"criterion {num} [{verdict}] {title}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
