import warnings

import pytest

from vkde.errors import KernelRegularityWarning

ACCEPTANCE_LINES = []


@pytest.fixture(autouse=True)
def _quiet_regularity_warning():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", KernelRegularityWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
