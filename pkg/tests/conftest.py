import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_results: dict[str, list[bool]] = {}
_order: list[str] = []


def _label(item):
    marker = item.get_closest_marker("acceptance")
    return marker.args[0] if marker and marker.args else None


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    label = _label(item)
    if label is None:
        return
    if label not in _results:
        _results[label] = []
        _order.append(label)
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _results[label].append(rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _order:
        return
    terminalreporter.section("acceptance criteria")
    for label in _order:
        runs = _results[label]
        status = "PASS" if runs and all(runs) else "FAIL"
        terminalreporter.write_line(f"{status}  {label}  ({sum(runs)}/{len(runs)} checks)")
