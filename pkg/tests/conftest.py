"""Shared fixtures and the acceptance-summary hook.

Each acceptance test carries a short criterion label; at the end of the
session one pass/fail line per criterion is printed so the gate can be
read off the terminal directly.
"""

import pytest

from funnelsim.mission import list_bundled_scenarios, load_scenario

_ACCEPTANCE_RESULTS = {}


@pytest.fixture(scope="session")
def bundled():
    """Name -> loaded ScenarioConfig for every shipped scenario."""
    return {name: load_scenario(path)
            for name, path in list_bundled_scenarios().items()}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker and report.when == "call":
        label = marker.args[0]
        _ACCEPTANCE_RESULTS[label] = report.outcome


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(label): acceptance-criterion test")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_ACCEPTANCE_RESULTS):
        outcome = _ACCEPTANCE_RESULTS[label]
        terminalreporter.write_line(
            f"{label}: {'PASS' if outcome == 'passed' else 'FAIL'}")
