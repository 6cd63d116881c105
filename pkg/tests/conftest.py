import os
from collections import OrderedDict

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# criterion id -> list of (passed, detail) collected from tests marked ``criterion``
_CRITERIA: "OrderedDict[str, list]" = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        details = [str(v) for k, v in item.user_properties if k == "detail"]
        _CRITERIA.setdefault(str(marker.args[0]), []).append((rep.passed, "; ".join(details)))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for cid, results in _CRITERIA.items():
        ok = all(p for p, _ in results)
        detail = " | ".join(d for _, d in results if d)
        terminalreporter.write_line(f"criterion {cid:<4} {'PASS' if ok else 'FAIL'}  {detail}")
