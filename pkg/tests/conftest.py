import pytest

# filled by test_acceptance.py; printed once at the end of the session
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number])


@pytest.fixture
def report():
    def record(number: int, ok: bool, detail: str, partial: bool = False):
        scope = " (partial)" if partial else ""
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}{scope}: {detail}"
        ACCEPTANCE[number] = line
        print(line)
        return ok
    return record
