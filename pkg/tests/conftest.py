import sys
from pathlib import Path

import pytest

from tracebound import core

sys.path.insert(0, str(Path(__file__).parent))

# growth-bound assertions stay on for the whole suite
core.set_control_checks(True)


def pytest_terminal_summary(terminalreporter):
    stats = core.control_stats
    fired = sum(v for k, v in stats.items() if k.endswith(":violations"))
    checked = sum(v for k, v in stats.items() if not k.endswith(":violations"))
    terminalreporter.write_line(f"control checks: {checked} evaluated, {fired} violations")
    for n in sorted(_criteria):
        terminalreporter.write_line(f"criterion {n}: {'PASS' if _criteria[n] else 'FAIL'}")


@pytest.fixture
def rng():
    import random

    return random.Random(20240611)


_criteria: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion exercised by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and rep.passed):
        return
    n = mark.args[0]
    ok = rep.passed and not rep.skipped
    _criteria[n] = _criteria.get(n, True) and ok
