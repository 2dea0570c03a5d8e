import time

import pytest

from chkit import compiler as cc
from chkit import tucker as tk

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title, limit): acceptance criterion with a time budget")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_call(item):
    start = time.perf_counter()
    yield
    item.user_properties.append(("elapsed", time.perf_counter() - start))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    num, title, limit = mark.args
    elapsed = dict(item.user_properties).get("elapsed", 0.0)
    if rep.passed and elapsed > limit:
        rep.outcome = "failed"
        rep.longrepr = f"criterion {num} took {elapsed:.1f}s, over its {limit}s budget"
    _CRITERIA[num] = (title, rep.passed, elapsed, limit)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        title, ok, elapsed, limit = _CRITERIA[num]
        terminalreporter.write_line(
            f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {elapsed:7.2f}s (budget {limit}s)  {title}")


@pytest.fixture(scope="session")
def vt1():
    return tk.reduce_ms_to_variant(tk.generate_grid("ms", 1, 0)).target


@pytest.fixture(scope="session")
def vt2():
    return tk.reduce_ms_to_variant(tk.generate_grid("ms", 2, 0)).target


@pytest.fixture(scope="session")
def compiled1(vt1):
    return cc.compile_vt(vt1, copies=12)


@pytest.fixture(scope="session")
def compiled2(vt2):
    return cc.compile_vt(vt2, copies=12)
