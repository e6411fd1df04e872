from pathlib import Path

import pytest

from resmilp.instances import sfh_system

ROOT = Path(__file__).resolve().parent.parent
MODELS = ROOT / "models"


@pytest.fixture
def sfh():
    return sfh_system()


@pytest.fixture
def sfh_yaml():
    return MODELS / "sfh.yaml"


@pytest.fixture
def models_dir():
    return MODELS


def pytest_terminal_summary(terminalreporter):
    import re
    import sys

    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = dict(module.RESULTS) if module else {}
    # a criterion that crashed before recording still gets a FAIL line
    for report in terminalreporter.stats.get("failed", []):
        m = re.search(r"test_criterion_(\d+)_", report.nodeid)
        if m and int(m.group(1)) not in results:
            results[int(m.group(1))] = (False, "error: " + report.longreprtext.strip().splitlines()[-1])
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(results):
        ok, detail = results[criterion]
        terminalreporter.write_line(f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}")
