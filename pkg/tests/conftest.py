import numpy as np
import pytest

# (criterion, passed, detail) rows filled by test_acceptance.py
ACCEPTANCE_LOG: list[tuple[str, bool, str]] = []


@pytest.fixture
def rng():
    return np.random.default_rng(7301)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LOG:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_LOG:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
