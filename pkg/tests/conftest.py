import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from acceptance_log import RESULTS  # noqa: E402


@pytest.fixture
def perm2():
    return np.array([[0.0, 1.0], [1.0, 0.0]])


@pytest.fixture
def seed42_uniform3():
    """3x3 symmetric matrix with Uniform(0,1) off-diagonals from seed 42."""
    rng = np.random.default_rng(42)
    upper = np.triu(rng.uniform(size=(3, 3)), 1)
    return upper + upper.T


def pytest_terminal_summary(terminalreporter):
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
