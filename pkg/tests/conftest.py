from __future__ import annotations

import pytest

from wmindex.core import Alphabet, WeightedString

# Worked six-position example used across the suite: two letters, ties at
# positions 2 and 5, certain first position.
EX1_ROWS = [
    [1.0, 0.0],
    [0.5, 0.5],
    [0.75, 0.25],
    [0.8, 0.2],
    [0.5, 0.5],
    [0.25, 0.75],
]


def make_ex1() -> WeightedString:
    return WeightedString(Alphabet(("A", "B")), EX1_ROWS)


@pytest.fixture
def ex1() -> WeightedString:
    return make_ex1()
