import pytest

# criterion id -> (passed, detail); filled by the acceptance tests
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def record():
    def _record(cid: str, passed: bool, detail: str) -> bool:
        ACCEPTANCE[cid] = (bool(passed), detail)
        print(f"{'PASS' if passed else 'FAIL'} criterion {cid}: {detail}")
        return bool(passed)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE, key=lambda c: (int("".join(ch for ch in c if ch.isdigit())), c)):
        ok, detail = ACCEPTANCE[cid]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {cid}: {detail}")
