import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from heisframes.plancherel import shannon_field  # noqa: E402

_ACCEPTANCE: dict[str, tuple[str, str]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def shannon():
    return shannon_field()


@pytest.fixture(scope="session")
def shannon_fine():
    return shannon_field(nodes_per_interval=48, panels=8)


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_a" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        tag = "A" + str(int(name.split("_")[1][1:]))
        detail = dict(report.user_properties).get("detail", "")
        _ACCEPTANCE[tag] = ("PASS" if report.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for tag in sorted(_ACCEPTANCE, key=lambda t: int(t[1:])):
        status, detail = _ACCEPTANCE[tag]
        terminalreporter.write_line(f"{tag:<4} {status}  {detail}")
