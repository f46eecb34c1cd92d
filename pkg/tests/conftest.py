import sys

import pytest

from lkwaves import WaveSpec, sample


@pytest.fixture(scope="session")
def torus25():
    """A handful of n = 25 torus realisations on the minimal exact grid."""
    return [sample(WaveSpec("torus", 25, 11, r)) for r in range(4)]


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(module, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
