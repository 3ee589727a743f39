import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).parent / "fixtures"

_criteria = []


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def criterion():
    """Record an acceptance verdict; lines are printed in the terminal summary."""

    def record(label, passed, detail=""):
        line = f"{'PASS' if passed else 'FAIL'}  {label}" + (f"  ({detail})" if detail else "")
        _criteria.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _criteria:
        terminalreporter.section("acceptance criteria")
        for line in _criteria:
            terminalreporter.write_line(line)
