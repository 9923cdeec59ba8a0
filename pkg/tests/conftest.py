import sys

import pytest

from oatune.casestudy import CNN_TABLE, RNN_TABLE
from oatune.design import FactorLevelTable, FactorSpec, make_plan
from oatune.synth import SyntheticObjective, SyntheticSpec


@pytest.fixture
def rnn_plan():
    return make_plan(RNN_TABLE)


@pytest.fixture
def cnn_plan():
    return make_plan(CNN_TABLE)


def small_table(h=3, k=4, direction="maximize"):
    return FactorLevelTable(
        tuple(FactorSpec(f"x{i}", tuple(range(10 * i, 10 * i + h))) for i in range(k)), direction
    )


def additive_objective(table, effects, offset=0.0):
    return SyntheticObjective(SyntheticSpec(table, effects, offset=offset))


# command prefix that runs the oat-synth entry point with this interpreter
SYNTH_CMD = [sys.executable, "-m", "oatune.synth"]


def pytest_terminal_summary(terminalreporter):
    results = getattr(sys.modules.get("test_acceptance"), "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
