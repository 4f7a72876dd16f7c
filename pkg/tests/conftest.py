import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from peer_rank.core import NOT_EVALUATED, GridPlacement, GridReview, ReviewKind  # noqa: E402

# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = []


def random_review(rng, employees, reviewer=None, kind=ReviewKind.TEAM, tie_grid=False,
                  skip_prob=0.15, timestamp=0):
    """A valid random review over ``employees``."""
    if reviewer is None:
        reviewer = employees[rng.integers(len(employees))]
    others = [e for e in employees if e != reviewer]
    k = int(rng.integers(0, min(len(others), kind.max_placements) + 1))
    peers = [others[i] for i in rng.choice(len(others), size=k, replace=False)]

    def coord():
        if rng.random() < skip_prob:
            return NOT_EVALUATED
        if tie_grid:
            return float(rng.integers(0, 11)) / 10.0
        return float(rng.random())

    return GridReview(reviewer, timestamp, kind,
                      tuple(GridPlacement(p, coord(), coord()) for p in peers))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def criterion(request):
    def record(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
