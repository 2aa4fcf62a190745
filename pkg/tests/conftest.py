from __future__ import annotations

import re
from pathlib import Path

import pytest

from utgplan.datasets import calendar_utg
from utgplan.utg import Utg

DATA = Path(__file__).parent / "data"

_AC_TEST = re.compile(r"test_acceptance\.py::test_ac(\d)_(\w+)")


@pytest.fixture(scope="session")
def calendar() -> Utg:
    return calendar_utg()


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows: dict[str, tuple[str, str]] = {}
    for outcome in ("passed", "failed", "error", "skipped"):
        for report in terminalreporter.stats.get(outcome, []):
            m = _AC_TEST.search(getattr(report, "nodeid", ""))
            if not m or report.when not in ("call", "setup"):
                continue
            verdict = "PASS" if outcome == "passed" else "FAIL"
            num, name = m.groups()
            prev = rows.get(num)
            if prev is None or verdict == "FAIL":
                rows[num] = (verdict, name.replace("_", " "))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(rows):
        verdict, name = rows[num]
        terminalreporter.write_line(f"AC{num} {verdict}  {name}")
