import pytest
from hypothesis import settings

from gausswell.model import PotentialParams
from gausswell.numerics import PrecisionContext

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture
def params():
    return PotentialParams("0.8", "0.1")


@pytest.fixture
def ctx():
    return PrecisionContext(60)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
