import pytest

_LINES: dict[str, str] = {}


@pytest.fixture
def criterion():
    """``criterion(key, ok, detail)`` records one acceptance line and returns ``ok``."""

    def record(key: str, ok: bool, detail: str) -> bool:
        line = f"{key} {'PASS' if ok else 'FAIL'}: {detail}"
        _LINES[key] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(_LINES):
            terminalreporter.write_line(_LINES[key])
