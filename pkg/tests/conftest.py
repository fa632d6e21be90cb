import pytest

#: (criterion, status, detail) lines recorded by the acceptance suite
ACCEPTANCE_LOG: list[tuple[str, str, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LOG:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in ACCEPTANCE_LOG:
        terminalreporter.write_line(f"{status:<5} {name}: {detail}")


@pytest.fixture
def record():
    def _record(name: str, ok: bool, detail: str, expected_failure: bool = False) -> None:
        status = "PASS" if ok else ("XFAIL" if expected_failure else "FAIL")
        ACCEPTANCE_LOG.append((name, status, detail))
        print(f"{status} {name}: {detail}")

    return _record
