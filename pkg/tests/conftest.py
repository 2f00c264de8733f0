import pytest

ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """report(n, ok, detail) records one acceptance line and returns ok."""
    def report(n, ok, detail=""):
        ACCEPTANCE[n] = (bool(ok), detail)
        return ok
    return report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
