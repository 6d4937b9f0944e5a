from __future__ import annotations

import pytest

from r3var.cube_reps import sieve_r3


@pytest.fixture(scope="session")
def table_1e4():
    return sieve_r3(10**4)


@pytest.fixture(scope="session")
def table_small():
    return sieve_r3(2000)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
