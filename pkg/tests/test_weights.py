from __future__ import annotations

import math
from typing import TYPE_CHECKING

import numpy as np
import pytest

from haarlab.functions.stepfn import Weight, random_weight
from haarlab.grid.dyadic import ROOT, DyadicInterval
from haarlab.grid.measure import build_lmp
from haarlab.operators.shift import dyadic_hilbert
from haarlab.sparse.family import SparseFamily
from haarlab.weights import (
    balanced_sandwich,
    build_badweight,
    c_p_b,
    char_Ap,
    char_Ap_b,
    char_Ap_N,
    char_one_sided_01,
    duality_check,
    fair_division_check,
    maximal_char_probe,
    pair_bound_below,
    shift_weight_bound,
    weighted_shift_ratio,
)

if TYPE_CHECKING:
    from haarlab.grid.measure import MeasureTree

UNIT = Weight({ROOT: 1.0})


@pytest.fixture
def weight() -> Weight:
    return random_weight(np.random.default_rng(11), 4, 8, spread=2.0)


def test_c_p_b(lmp: MeasureTree) -> None:
    sibling = DyadicInterval(3, 1)
    assert c_p_b(lmp, sibling, sibling, 3) == 1
    assert c_p_b(lmp, sibling, DyadicInterval(4, 2), 2) == pytest.approx(1 / 16)
    with pytest.raises(ValueError, match="at least 1"):
        c_p_b(lmp, sibling, sibling, 0.5)


@pytest.mark.parametrize("p", [1.5, 2, 3])
def test_unit_weight(uniform: MeasureTree, p: float) -> None:
    assert char_Ap(uniform, UNIT, p, 6).value == pytest.approx(1)
    balanced = char_Ap_b(uniform, UNIT, p, 6)
    assert balanced.value == pytest.approx(1)
    assert balanced.off_diagonal < 1
    assert char_Ap_N(uniform, UNIT, p, 2, 6).value == pytest.approx(1)
    assert balanced_sandwich(uniform, UNIT, p, 1, 6) == pytest.approx((1, 1))


def test_one_sided_unit_weight(lmp: MeasureTree) -> None:
    result = char_one_sided_01(lmp, UNIT, 8)
    assert result.value == pytest.approx(1)
    assert result.kind == "one-sided-01"


def test_classical_needs_p_above_one(uniform: MeasureTree) -> None:
    with pytest.raises(ValueError, match="p=1"):
        char_Ap(uniform, UNIT, 1, 4)
    with pytest.raises(ValueError, match="nonnegative"):
        char_Ap_N(uniform, UNIT, 2, -1, 4)


@pytest.mark.parametrize("p", [2, 3])
def test_inclusion_chain(random_tree: MeasureTree, weight: Weight, p: float) -> None:
    classical = char_Ap(random_tree, weight, p, 6).value
    balanced = char_Ap_b(random_tree, weight, p, 6).value
    distance = char_Ap_N(random_tree, weight, p, 1, 6).value
    assert 1 - 1e-12 <= classical <= balanced + 1e-12
    assert balanced <= distance + 1e-12


@pytest.mark.parametrize("p", [1.5, 2, 3])
def test_duality(random_tree: MeasureTree, weight: Weight, p: float) -> None:
    direct, dual = duality_check(random_tree, weight, p, 6)
    assert dual == pytest.approx(direct, rel=1e-10)


def test_fair_division(lmp: MeasureTree, weight: Weight) -> None:
    members = [ROOT, DyadicInterval(1, 0), DyadicInterval(2, 3), DyadicInterval(4, 1)]
    family = SparseFamily.build(lmp, members)
    assert fair_division_check(lmp, weight, 2, family) >= 1 - 1e-10
    assert fair_division_check(lmp, UNIT, 2, family) >= 1
    nested = SparseFamily.build(lmp, [ROOT, DyadicInterval(1, 0), DyadicInterval(1, 1)])
    with pytest.raises(ValueError, match="eta > 0"):
        fair_division_check(lmp, weight, 2, nested)


def test_maximal_char_probe(weight: Weight) -> None:
    tree = build_lmp(10, mode="float")
    best, residual = maximal_char_probe(tree, weight, 2, 1, 5)
    assert best >= 1 - 1e-12
    assert residual >= -1e-10


def test_pair_bound_below(lmp_float: MeasureTree, weight: Weight) -> None:
    first, second = DyadicInterval(3, 1), DyadicInterval(2, 1)
    ratio_squared, value, rho = pair_bound_below(lmp_float, weight, first, second)
    assert value > 0
    assert rho > 0
    assert ratio_squared >= rho * value * (1 - 1e-9)
    with pytest.raises(ValueError, match="disjoint"):
        pair_bound_below(lmp_float, weight, DyadicInterval(1, 0), DyadicInterval(2, 0))


@pytest.mark.parametrize("k", [4, 5])
def test_bad_weight_off_diagonal(k: int) -> None:
    tree = build_lmp(2**k + 2, mode="float")
    bad = build_badweight(tree, k)
    assert bad.value_on(DyadicInterval(2**k, 1)) == pytest.approx(2 ** (-k / 2))
    assert bad.value_on(DyadicInterval(2**k, 0)) == 1
    result = char_Ap_b(tree, bad, 2, 2**k + 1)
    assert result.off_diagonal == pytest.approx(2 ** (k / 2) / 16)
    assert result.to_dict()["kind"] == "balanced"


def test_build_badweight_errors(uniform: MeasureTree, lmp: MeasureTree) -> None:
    with pytest.raises(ValueError, match="lmp measure"):
        build_badweight(uniform, 2)
    with pytest.raises(ValueError, match="at least 1"):
        build_badweight(lmp, 0)
    with pytest.raises(ValueError, match="depth_bound"):
        build_badweight(lmp, 4)


def test_shift_weight_bound(uniform: MeasureTree) -> None:
    assert shift_weight_bound(1, 1, 2) == 2
    assert shift_weight_bound(4, 1, 2) == pytest.approx(4 + 4 * math.sqrt(1))
    opnorm, bound = weighted_shift_ratio(
        uniform, dyadic_hilbert(), UNIT, 2, 6, trials=5
    )
    assert 0 < opnorm <= bound
    assert bound == pytest.approx(2)
