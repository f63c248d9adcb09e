import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import netlaplace as nl  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def path4():
    return nl.build_transition(nl.path_a(4))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT, summary_lines
    except ImportError:
        return
    if not REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for line in summary_lines():
        terminalreporter.write_line(line)
