import contextlib
import os
import time

import pytest

from modparity.ingest import optimal_records, parse_allcurves, parse_degphi

DATA = os.path.join(os.path.dirname(__file__), "data")

_ACCEPTANCE: dict[int, tuple[str, str]] = {}
_REPORTS: list[str] = []


def pytest_addoption(parser):
    parser.addoption("--slow", action="store_true", default=False, help="run long-running tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running test, needs --slow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--slow"):
        return
    skip = pytest.mark.skip(reason="needs --slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if _REPORTS:
        terminalreporter.section("consistency reports")
        for line in _REPORTS:
            terminalreporter.write_line(line)
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        status, detail = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {status} - {detail}")


@pytest.fixture
def acceptance():
    """Context manager recording PASS/FAIL for one numbered criterion."""

    @contextlib.contextmanager
    def record(number: int, title: str):
        t0 = time.perf_counter()
        info = {}
        try:
            yield info
        except BaseException as exc:
            _ACCEPTANCE[number] = ("FAIL", f"{title}: {type(exc).__name__}: {str(exc)[:200]}")
            raise
        dt = time.perf_counter() - t0
        extra = f" ({info['summary']})" if "summary" in info else ""
        _ACCEPTANCE[number] = ("PASS", f"{title}{extra} [{dt:.1f}s]")

    return record


@pytest.fixture
def report_line():
    """Append a line to the non-asserting statistics printed after the run."""
    return _REPORTS.append


@pytest.fixture(scope="session")
def allcurves():
    with open(os.path.join(DATA, "allcurves.txt")) as fh:
        return parse_allcurves(fh)


@pytest.fixture(scope="session")
def degphi():
    with open(os.path.join(DATA, "degphi.txt")) as fh:
        return parse_degphi(fh)


@pytest.fixture(scope="session")
def optimal(allcurves, degphi):
    return optimal_records(allcurves.records, degphi)


class LevelCache:
    """Session-wide cache of per-level Hecke data; these are the slow objects."""

    def __init__(self):
        self._data = {}

    def __call__(self, N: int):
        from modparity.classify import level_data
        if N not in self._data:
            self._data[N] = level_data(N)
        return self._data[N]


@pytest.fixture(scope="session")
def levels():
    return LevelCache()
