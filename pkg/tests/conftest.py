import os
import sys
from collections import defaultdict

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("bggkit", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
settings.load_profile("bggkit")

CRITERIA = {
    "1": "projective standard: S^inf, normality, holonomy",
    "2": "projective dual, S^2, S^2*, Lambda^2 dimensions",
    "3": "projective infinitesimal automorphisms",
    "4": "splitting-operator Q coefficients",
    "5": "normalization: Rho tensor, C-projective family, CR correction",
    "6": "G2 rolling distribution",
    "7": "CR and Lagrangean contact bundles",
    "8": "path geometry",
    "9": "coordinate evaluation",
    "A": "Kostant complex identities",
    "B": "normal regular equivariant extensions",
    "C": "tractor curvature and Bianchi identity",
    "D": "prolongation post-conditions",
    "E": "stability of S^inf",
    "F": "coupling closure",
    "G": "exponential action identities",
}

_outcomes: dict[str, dict] = defaultdict(lambda: {"passed": 0, "failed": 0, "details": []})


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(key): acceptance criterion covered by the test")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if call.when == "call" or call.excinfo is not None:
        key = marker.args[0]
        failed = call.excinfo is not None and not call.excinfo.errisinstance(pytest.skip.Exception)
        entry = _outcomes[key]
        entry["failed" if failed else "passed"] += 1
        for name, value in item.user_properties:
            if name == "detail" and value not in entry["details"]:
                entry["details"].append(value)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for key, title in CRITERIA.items():
        if key not in _outcomes:
            terminalreporter.write_line(f"NOT RUN  {key}  {title}")
            continue
        entry = _outcomes[key]
        verdict = "FAIL" if entry["failed"] else "PASS"
        line = f"{verdict:<8} {key}  {title} ({entry['passed']} passed, {entry['failed']} failed)"
        terminalreporter.write_line(line)
        for detail in entry["details"]:
            terminalreporter.write_line(f"           {detail}")
