import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from iopredict.bench import StorageTarget

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def pytest_collection_modifyitems(config, items):
    if os.environ.get("IOPREDICT_HARDWARE_TESTS") == "1":
        return
    skip = pytest.mark.skip(reason="set IOPREDICT_HARDWARE_TESTS=1 to run hardware-dependent checks")
    for item in items:
        if "hardware" in item.keywords:
            item.add_marker(skip)


_criteria: dict[int, bool] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and rep.passed):
        return
    n = mark.args[0]
    _criteria[n] = _criteria.get(n, True) and rep.passed


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if _criteria[n] else 'FAIL'}")


@pytest.fixture
def target(tmp_path) -> StorageTarget:
    """Benchmark target on tmpfs when available, else the pytest temp dir."""
    shm = Path("/dev/shm")
    if shm.is_dir() and os.access(shm, os.W_OK):
        root = shm / f"iopredict-test-{os.getpid()}-{tmp_path.name}"
        root.mkdir(parents=True, exist_ok=True)
        yield StorageTarget("shm", root, "memory_fs")
        for p in sorted(root.rglob("*"), reverse=True):
            p.unlink() if p.is_file() else p.rmdir()
        root.rmdir()
    else:
        yield StorageTarget("tmp", tmp_path, "other_mounted")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
