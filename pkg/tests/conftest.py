import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rankone.mobius import mobius_sieve  # noqa: E402

_criteria: dict[str, str] = {}


@pytest.fixture(scope="session")
def small_table():
    return mobius_sieve(2000, segment_size=97)


@pytest.fixture(scope="session")
def table_1e4():
    return mobius_sieve(20_000)


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("RQ_CACHE_DIR", str(tmp_path / "cache"))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    label = marker.args[0]
    if report.failed:
        _criteria[label] = "FAIL"
    elif report.when == "call" and report.passed:
        _criteria.setdefault(label, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label, status in _criteria.items():
        terminalreporter.write_line(f"{status} {label}")
