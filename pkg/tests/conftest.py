import copy

import pytest

from spinfaraday import config as cfg
from spinfaraday.physics import TrionParameters

ACCEPTANCE_LINES = []


@pytest.fixture
def params():
    return TrionParameters()


@pytest.fixture(scope="session")
def _default_tree():
    return cfg.load_config().tree


@pytest.fixture
def tree(_default_tree):
    return copy.deepcopy(_default_tree)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
