"""Shared fixtures and the per-criterion acceptance summary.

Tests tagged ``@pytest.mark.criterion(k, "description")`` are grouped by
``k``; at the end of the session one line per criterion reports PASS only if
every test in its group passed.
"""
from __future__ import annotations

from collections import OrderedDict

import numpy as np
import pytest

_RESULTS: "OrderedDict[int, dict]" = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(k, description): acceptance criterion k")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    k = mark.args[0]
    desc = mark.args[1] if len(mark.args) > 1 else ""
    entry = _RESULTS.setdefault(k, {"desc": desc, "passed": [], "failed": []})
    if desc and not entry["desc"]:
        entry["desc"] = desc
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        bucket = "passed" if rep.passed else "failed"
        entry[bucket].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(_RESULTS):
        e = _RESULTS[k]
        ok = e["passed"] and not e["failed"]
        status = "PASS" if ok else "FAIL"
        n = len(e["passed"]) + len(e["failed"])
        line = f"criterion {k}: {status} ({len(e['passed'])}/{n}) {e['desc']}"
        if e["failed"]:
            line += " -- failing: " + ", ".join(e["failed"])
        tr.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
