import os
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
CCPP_ENV = "CCPP_CSV"
CCPP_CANDIDATES = (ROOT / "data" / "ccpp.csv", ROOT / "data" / "Folds5x2_pp.csv")

_criteria: dict[int, tuple[str, str, str]] = {}


def ccpp_path() -> Path | None:
    """Location of the combined-cycle plant CSV, or None when it is absent."""
    env = os.environ.get(CCPP_ENV)
    if env:
        return Path(env)
    for candidate in CCPP_CANDIDATES:
        if candidate.is_file():
            return candidate
    return None


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and not report.passed):
        detail = ""
        if report.failed and call.excinfo is not None:
            detail = str(call.excinfo.value).strip().splitlines()[0][:160]
        status = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
        _criteria[number] = (status, title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        status, title, detail = _criteria[number]
        line = f"criterion {number}: {status}  {title}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
