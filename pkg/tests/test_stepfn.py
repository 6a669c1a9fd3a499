from __future__ import annotations

import math
from fractions import Fraction
from typing import TYPE_CHECKING

import numpy as np
import pytest

from haarlab.functions.stepfn import (
    DyadicStepFunction,
    Weight,
    bmo_norm,
    conjugate_exponent,
    constant,
    distribution,
    function_from_records,
    function_to_records,
    indicator,
    inner,
    integral,
    load_weight,
    lp_norm,
    random_step_function,
    random_weight,
    weighted_measure,
)
from haarlab.grid.dyadic import ROOT, DyadicInterval
from haarlab.utils.common_utils import write_json

if TYPE_CHECKING:
    from pathlib import Path

    from haarlab.grid.measure import MeasureTree


@pytest.fixture
def func() -> DyadicStepFunction:
    """2 on [0, 1/2), 4 on [1/2, 3/4) and 0 on [3/4, 1)."""
    return DyadicStepFunction.from_pieces(
        {DyadicInterval(1, 0): Fraction(2), DyadicInterval(2, 2): Fraction(4)}
    )


def test_partition_is_validated() -> None:
    with pytest.raises(ValueError, match="do not cover"):
        DyadicStepFunction({DyadicInterval(1, 0): 1})
    with pytest.raises(ValueError, match="partition"):
        DyadicStepFunction(
            {DyadicInterval(1, 0): 1, DyadicInterval(2, 0): 2, ROOT.right: 0}
        )
    with pytest.raises(ValueError, match="at least one cell"):
        DyadicStepFunction({})


def test_canonical_form(func: DyadicStepFunction) -> None:
    merged = DyadicStepFunction({DyadicInterval(1, 0): 3, DyadicInterval(1, 1): 3})
    assert merged == constant(3)
    assert len(merged) == 1
    assert func.cells == [DyadicInterval(1, 0), *ROOT.right.children]
    assert func - func == constant(0)
    assert func.restrict(DyadicInterval(1, 1)) == DyadicStepFunction.from_pieces(
        {DyadicInterval(2, 2): 4}
    )


def test_lookup(func: DyadicStepFunction) -> None:
    assert func.value_on(DyadicInterval(3, 5)) == 4
    assert func.is_constant_on(DyadicInterval(4, 1))
    assert not func.is_constant_on(DyadicInterval(1, 1))
    with pytest.raises(ValueError, match="not constant"):
        func.value_on(DyadicInterval(1, 1))
    assert func.pieces_over(DyadicInterval(1, 1)) == [
        (DyadicInterval(2, 2), 4),
        (DyadicInterval(2, 3), 0),
    ]
    assert func.support() == [DyadicInterval(1, 0), DyadicInterval(2, 2)]
    assert func.sup_norm() == 4
    assert func.min_value() == 0


def test_arithmetic_on_common_refinement(func: DyadicStepFunction) -> None:
    other = indicator(DyadicInterval(3, 1))
    total = func + other
    assert total.value_on(DyadicInterval(3, 1)) == 3
    assert total.value_on(DyadicInterval(3, 0)) == 2
    assert (func * other).support() == [DyadicInterval(3, 1)]
    assert (2 * func).value_on(DyadicInterval(2, 2)) == 8
    assert (1 - other).value_on(DyadicInterval(3, 1)) == 0
    assert (-func).min_value() == -4
    assert func.maximum(3 * other).value_on(DyadicInterval(3, 1)) == 3


def test_integrals(uniform: MeasureTree, func: DyadicStepFunction) -> None:
    assert integral(uniform, func) == 2
    table = func.integrals(uniform)
    assert table.average(DyadicInterval(1, 1)) == 2
    assert table.integral(DyadicInterval(3, 4)) == Fraction(1, 2)
    assert sorted(table.nodes()) == [
        ROOT,
        DyadicInterval(1, 0),
        DyadicInterval(1, 1),
        DyadicInterval(2, 2),
        DyadicInterval(2, 3),
    ]
    assert sorted(table.internal_nodes()) == [ROOT, DyadicInterval(1, 1)]
    assert func.integrals(uniform) is table


def test_norms(uniform: MeasureTree, func: DyadicStepFunction) -> None:
    assert lp_norm(uniform, func, 1) == 2
    assert float(lp_norm(uniform, func, 2)) == pytest.approx(math.sqrt(6))
    assert lp_norm(uniform, func, math.inf) == 4
    assert inner(uniform, func, indicator(DyadicInterval(1, 1))) == 1
    with pytest.raises(ValueError, match="at least 1"):
        lp_norm(uniform, func, 0.5)


def test_weighted_norms(lmp: MeasureTree) -> None:
    weight = Weight.from_pieces({DyadicInterval(2, 1): Fraction(4)}, fill=Fraction(1))
    quarter = DyadicInterval(2, 1)
    assert weighted_measure(lmp, weight, quarter) == 4 * lmp.mass(quarter)
    assert weighted_measure(lmp, None, DyadicInterval(2, 1)) == Fraction(1, 4)
    ones = constant(1)
    assert lp_norm(lmp, ones, 1, weight) == 1 + 3 * Fraction(1, 4)


def test_bmo_norm(uniform: MeasureTree, func: DyadicStepFunction) -> None:
    assert bmo_norm(uniform, func) == 2
    assert bmo_norm(uniform, constant(5)) == 0


def test_distribution(uniform: MeasureTree, func: DyadicStepFunction) -> None:
    assert distribution(uniform, func) == [
        (4, Fraction(1, 4)),
        (2, Fraction(3, 4)),
        (0, Fraction(1)),
    ]


def test_weight() -> None:
    with pytest.raises(ValueError, match="positive"):
        Weight({ROOT: 0})
    weight = Weight.from_pieces({DyadicInterval(1, 1): 4.0}, fill=1.0)
    assert weight.dual(2).value_on(DyadicInterval(1, 1)) == pytest.approx(0.25)
    assert weight.dual(3).value_on(DyadicInterval(1, 1)) == pytest.approx(0.5)
    assert isinstance(weight.power(2), Weight)
    with pytest.raises(ValueError, match="p=1"):
        weight.dual(1)


@pytest.mark.parametrize(("p", "expected"), [(2, 2), (3, 1.5), (1.5, 3), (1, math.inf)])
def test_conjugate_exponent(p: float, expected: float) -> None:
    assert conjugate_exponent(p) == pytest.approx(expected)


def test_records(tmp_path: Path, func: DyadicStepFunction) -> None:
    records = function_to_records(func)
    assert records[0] == {"interval": "1:0", "value": "2/1"}
    assert function_from_records(records) == func
    with pytest.raises(ValueError, match="duplicate"):
        function_from_records(records + records[:1])

    path = str(tmp_path / "weight.json")
    write_json(function_to_records(func + 1), path)
    weight = load_weight(path, exact=True)
    assert weight.min_value() == 1
    write_json(records, path)
    with pytest.raises(ValueError, match="positive"):
        load_weight(path)


def test_random_step_function() -> None:
    support = DyadicInterval(2, 1)
    first = random_step_function(np.random.default_rng([0, 1]), 6, 10, support=support)
    second = random_step_function(np.random.default_rng([0, 1]), 6, 10, support=support)
    assert first == second
    assert all(support.contains(cell) for cell in first.support())
    assert first.max_level <= 6
    exact = random_step_function(np.random.default_rng(2), 5, rational=True, low=-1.0)
    assert all(isinstance(val, Fraction) for val in exact.values())
    assert all(-1 <= val <= 1 for val in exact.values())


def test_random_weight() -> None:
    weight = random_weight(np.random.default_rng(5), 4, 6, spread=2.0)
    assert isinstance(weight, Weight)
    assert all(0.25 <= val <= 4 for val in weight.values())
