from __future__ import annotations

import pytest

from haarlab.grid.measure import (
    MeasureTree,
    build_lmp,
    build_random_balanced,
    build_uniform,
)


@pytest.fixture
def lmp() -> MeasureTree:
    """Chain measure in exact arithmetic, deep enough for the small examples."""
    return build_lmp(12, mode="rational")


@pytest.fixture
def lmp_float() -> MeasureTree:
    return build_lmp(16, mode="float")


@pytest.fixture
def uniform() -> MeasureTree:
    return build_uniform(8, mode="rational")


@pytest.fixture
def random_tree() -> MeasureTree:
    return build_random_balanced(7, seed=3, theta=0.25, mode="float")
