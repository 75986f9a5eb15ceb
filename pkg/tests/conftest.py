import sys
from pathlib import Path

import pytest

from diskspec import build_zero_table

sys.path.insert(0, str(Path(__file__).parent))

_GATE: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not rep.failed:
        return
    number, title = mark.args
    status = "PASS" if rep.passed else "FAIL"
    prev = _GATE.get(number)
    if prev is None or prev[0] == "PASS":
        _GATE[number] = (status, title)


def pytest_terminal_summary(terminalreporter):
    if not _GATE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_GATE):
        status, title = _GATE[number]
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {title}")


@pytest.fixture(scope="session")
def table():
    """Zeros up to r = 60; enough for every geometry and search test."""
    return build_zero_table(60.0)


@pytest.fixture(scope="session")
def big_table():
    """Zeros past n = 2*10^4."""
    return build_zero_table(10_020.0)
