from __future__ import annotations

from fractions import Fraction
from typing import TYPE_CHECKING

import numpy as np
import pytest

from haarlab.functions.stepfn import constant, indicator, integral, random_step_function
from haarlab.grid.dyadic import ROOT, DyadicInterval
from haarlab.sparse.czd import (
    cz_decompose,
    good_region,
    select_intervals,
    stopping_children,
    stopping_family,
    stopping_union,
)

if TYPE_CHECKING:
    from haarlab.grid.measure import MeasureTree

SIBLING_5 = DyadicInterval(5, 1)
CHAIN_4 = DyadicInterval(4, 0)


def test_chain_example(lmp: MeasureTree) -> None:
    func, zero = indicator(SIBLING_5), constant(0)
    result = cz_decompose(lmp, func, zero, Fraction(2, 5), 0, ROOT)
    assert result.selected == [SIBLING_5]
    expected_bad = indicator(SIBLING_5) - Fraction(1, 5) * indicator(CHAIN_4)
    assert result.bad[SIBLING_5][0] == expected_bad
    assert result.bad[SIBLING_5][1] == zero
    assert result.good[0] == Fraction(1, 5) * indicator(CHAIN_4)
    assert result.reconstruction_error() == 0
    assert integral(lmp, result.bad_part(0)) == 0


def test_random_decomposition(lmp: MeasureTree) -> None:
    rng = np.random.default_rng(6)
    for _ in range(5):
        f1 = random_step_function(rng, 8, 12, rational=True)
        f2 = random_step_function(rng, 8, 12, rational=True)
        lam1 = 2 * integral(lmp, f1) + Fraction(1, 8)
        lam2 = 2 * integral(lmp, f2) + Fraction(1, 8)
        result = cz_decompose(lmp, f1, f2, lam1, lam2, ROOT)
        assert result.reconstruction_error() == 0
        for interval, (bad1, bad2) in result.bad.items():
            assert integral(lmp, bad1) == integral(lmp, bad2) == 0
            assert all(interval.parent.contains(cell) for cell in bad1.support())
            first, second = f1.integrals(lmp), f2.integrals(lmp)
            assert first.average(interval) > lam1 or second.average(interval) > lam2
            for ancestor in interval.ancestors():
                if ancestor != ROOT:
                    assert first.average(ancestor) <= lam1
                    assert second.average(ancestor) <= lam2
        for left, right in zip(result.selected, result.selected[1:]):
            assert left.disjoint(right)
            assert left.right_key(12) <= right.left_key(12)


def test_input_validation(lmp: MeasureTree) -> None:
    func, zero = indicator(SIBLING_5), constant(0)
    with pytest.raises(ValueError, match="nonnegative"):
        cz_decompose(lmp, -func, zero, 1, 1, ROOT)
    with pytest.raises(ValueError, match="not supported inside"):
        cz_decompose(lmp, func, zero, 1, 1, DyadicInterval(1, 1))
    with pytest.raises(ValueError, match="must exceed the average"):
        cz_decompose(lmp, func, zero, Fraction(1, 100), 1, ROOT)


def test_select_does_not_descend_constant_stretches(uniform: MeasureTree) -> None:
    func = constant(1)
    half = Fraction(1, 2)
    assert select_intervals(uniform, func, func, half, half, ROOT) == list(
        ROOT.children
    )
    assert select_intervals(uniform, func, func, 1, 1, ROOT) == []


def test_stopping_families(lmp: MeasureTree) -> None:
    func, zero = indicator(SIBLING_5), constant(0)
    assert stopping_children(lmp, func, zero, ROOT) == [SIBLING_5]
    assert stopping_children(lmp, func, zero, SIBLING_5) == []
    assert stopping_children(lmp, zero, zero, ROOT) == []
    assert stopping_family(lmp, func, zero, ROOT, 0) == [SIBLING_5]
    assert stopping_family(lmp, func, zero, ROOT, 1) == []
    assert stopping_union(lmp, func, zero, ROOT, 2) == [SIBLING_5]
    with pytest.raises(ValueError, match="nonnegative"):
        stopping_family(lmp, func, zero, ROOT, -1)


def test_stopping_on_uniform(uniform: MeasureTree) -> None:
    func = indicator(DyadicInterval(6, 0))
    assert stopping_children(uniform, func, func, ROOT) == [DyadicInterval(5, 0)]
    assert stopping_union(uniform, func, func, ROOT, 1, multiplier=2) == [
        DyadicInterval(2, 0),
        DyadicInterval(4, 0),
    ]


def test_good_region(lmp: MeasureTree) -> None:
    region = good_region(lmp, indicator(SIBLING_5), constant(0), ROOT)
    assert SIBLING_5 not in region
    assert DyadicInterval(7, 4) not in region
    assert DyadicInterval(5, 0) in region
    assert CHAIN_4 in region
    assert ROOT in region
    inner_region = good_region(
        lmp, indicator(SIBLING_5), constant(0), DyadicInterval(2, 0)
    )
    assert not inner_region(DyadicInterval(1, 1))
