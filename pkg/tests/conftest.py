import warnings

import pytest

from qlob.context import QContext

ACCEPTANCE_LINES = []


@pytest.fixture
def ctx():
    return QContext(q=0.5)


@pytest.fixture(autouse=True)
def _quiet_overflow():
    # lattice sums touch products that overflow harmlessly at the far end
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
