import os
import sys
from pathlib import Path

import numpy as np
import pytest

from linermoo.instance import load_bundled, toy_instance
from linermoo.oracle import solve_oracle

# oracle speed steps per toy: fine enough to be meaningful, small enough to enumerate quickly
ORACLE_STEPS = {"toy_t1": 1.0, "toy_t2": 2.0, "toy_t3": 2.5}

_CRITERIA: dict[int, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")
    config.addinivalue_line("markers", "slow: long-running solver runs")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n = int(marker.args[0])
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _CRITERIA.setdefault(n, []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok = all(o == "passed" for o in _CRITERIA[n])
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}")


@pytest.fixture(scope="session")
def toys():
    return {name: toy_instance(name) for name in ORACLE_STEPS}


@pytest.fixture(scope="session")
def network():
    return load_bundled("paper_6routes")


@pytest.fixture(scope="session")
def row10():
    return load_bundled("row_10_2_3")


@pytest.fixture(scope="session")
def oracle_fronts(toys):
    return {name: solve_oracle(toys[name], ORACLE_STEPS[name]) for name in toys}


@pytest.fixture(scope="session")
def row10_ocea_run(tmp_path_factory):
    """One 300-generation OCEA run through the command line, shared by several tests."""
    from linermoo.cli import main

    out = tmp_path_factory.mktemp("row10_ocea")
    code = main(["solve", "--instance", "row_10_2_3", "--algo", "ocea", "--seed", "1",
                 "--generations", "300", "--out", str(out)])
    return code, out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
