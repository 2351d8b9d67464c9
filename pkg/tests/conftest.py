import pytest

_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_report():
    """Collects one verdict line per acceptance criterion for the terminal summary."""

    def report(number: int, title: str, passed: bool, details: str) -> None:
        line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {details}"
        print(line)
        _ACCEPTANCE_LINES.append((number, line))

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
