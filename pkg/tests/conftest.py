from pathlib import Path

import pytest

from sendov.tables import load_records

SPECS = Path(__file__).resolve().parent.parent / "specs"


@pytest.fixture(scope="session")
def records():
    return load_records()


@pytest.fixture(scope="session")
def record(records):
    def get(table, n):
        return next(r for r in records if r.table_id == table and r.n == n)
    return get


@pytest.fixture
def specs_dir():
    return SPECS


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line per acceptance criterion."""
    lines = request.config._acceptance_lines

    def report(number, title, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number} ({title}): {detail}"
        lines.append(line)
        print(line)
        return ok
    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
