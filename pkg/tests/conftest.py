from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

# criterion number -> (passed, detail), filled by the acceptance module
CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture()
def record():
    def _record(number: int, passed: bool, detail: str) -> None:
        CRITERIA[number] = (bool(passed), detail)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        ok, detail = CRITERIA[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
