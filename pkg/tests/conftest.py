import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from edgecons import parse_digraph  # noqa: E402

STRONG_EDGES = [(2, 1), (1, 3), (4, 2), (2, 4), (5, 2), (3, 5), (6, 3), (3, 6)]
QUASI_EDGES = [(1, 2), (1, 5), (1, 3), (2, 4), (5, 2), (3, 5), (3, 6)]
QUASI_TREE = (1, 2, 3, 4, 7)

# matrices as printed for the six-agent examples
PRINTED_E = np.array([
    [-1, 1, 0, 0, 0, 0, 0, 0],
    [1, 0, -1, 1, -1, 0, 0, 0],
    [0, -1, 0, 0, 0, 1, -1, 1],
    [0, 0, 1, -1, 0, 0, 0, 0],
    [0, 0, 0, 0, 1, -1, 0, 0],
    [0, 0, 0, 0, 0, 0, 1, -1],
])
PRINTED_AE = np.array([
    [0, -1, 0, 1, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, -1, 0, -1],
    [-1, 0, 0, -1, 0, 0, 0, 0],
    [1, 0, -1, 0, 0, 0, 0, 0],
    [-1, 0, 0, -1, 0, 0, 0, 0],
    [0, 0, 0, 0, -1, 0, 0, 1],
    [0, 0, 0, 0, 0, -1, 0, -1],
    [0, 0, 0, 0, 0, 1, -1, 0],
])
PRINTED_ET = np.array([
    [1, 1, 1, 0, 0],
    [-1, 0, 0, 1, 0],
    [0, 0, -1, 0, 1],
    [0, 0, 0, -1, 0],
    [0, -1, 0, 0, 0],
    [0, 0, 0, 0, -1],
])
PRINTED_EC = np.array([[0, 0], [-1, 0], [0, 1], [0, 0], [1, -1], [0, 0]])
# rows and columns in the order e1 e2 e3 e4 e7 e5 e6
PRINTED_AE_QUASI = np.array([
    [0, 1, 1, -1, 0, 0, 0],
    [1, 0, 1, 0, 0, -1, 0],
    [1, 1, 0, 0, -1, 0, -1],
    [0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 1],
    [0, 0, 0, -1, 0, 0, 0],
    [0, 0, 0, 0, 1, -1, 0],
])
PRINTED_T = np.array([[1, 0], [-1, 1], [0, -1], [0, 0], [0, 0]])


@pytest.fixture
def strong_graph():
    return parse_digraph(6, STRONG_EDGES)


@pytest.fixture
def quasi_graph():
    return parse_digraph(6, QUASI_EDGES)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
