from fractions import Fraction

import pytest

from maxaffcd.maxaff import MaxAffInstance
from maxaffcd.mrf import PairwiseModel

ACCEPTANCE_RESULTS = []


def make_three_planes(mode="exact"):
    """max{x1, x2, -x1 - x2}"""
    return MaxAffInstance.from_rows(
        [(0, [(0, 1)]), (0, [(1, 1)]), (0, [(0, -1), (1, -1)])], mode=mode
    )


def make_drift_planes(mode="exact"):
    """max{x1 - x2 - x3, x1 + 4, x1 + x2 + x3, -x1 + x2 + 2}"""
    return MaxAffInstance.from_rows(
        [
            (0, [(0, 1), (1, -1), (2, -1)]),
            (4, [(0, 1)]),
            (0, [(0, 1), (1, 1), (2, 1)]),
            (2, [(0, -1), (1, 1)]),
        ],
        mode=mode,
    )


def potts_pair():
    """Two nodes, two labels, zero unaries, pairwise [[4, 0], [0, 4]]."""
    return PairwiseModel.build(2, 2, [[0, 0], [0, 0]], {(0, 1): [[4, 0], [0, 4]]})


@pytest.fixture
def three_planes():
    return make_three_planes()


@pytest.fixture
def drift_planes():
    return make_drift_planes()


@pytest.fixture
def potts():
    return potts_pair()


@pytest.fixture
def record():
    def _record(criterion, passed, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
        ACCEPTANCE_RESULTS.append(line)
        print(line)

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)


F = Fraction
