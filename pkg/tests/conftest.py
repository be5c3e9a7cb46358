import pytest

_acceptance_lines: list[str] = []


@pytest.fixture(scope="session")
def acceptance_report():
    """Record one verdict line per acceptance criterion; the lines are
    echoed in the terminal summary after the run."""

    def report(name: str, ok: bool, detail: str = "") -> None:
        line = f"[acceptance] {name}: {'PASS' if ok else 'FAIL'}"
        if detail:
            line += f"  ({detail})"
        print(line)
        _acceptance_lines.append(line)

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
