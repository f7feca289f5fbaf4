import pytest

from biphoton.model import reference_config

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def ref():
    return reference_config()


@pytest.fixture
def report():
    """Record one PASS/FAIL line per acceptance criterion; echoed in the terminal summary."""

    def _report(criterion: str, passed: bool | None, detail: str):
        mark = "INFO" if passed is None else ("PASS" if passed else "FAIL")
        line = f"{mark}  {criterion}: {detail}"
        print(line)
        _ACCEPTANCE_LINES.append(line)
        return passed

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
