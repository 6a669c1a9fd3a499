from __future__ import annotations

import math
from fractions import Fraction
from typing import TYPE_CHECKING

import numpy as np
import pytest

from haarlab.functions.stepfn import (
    Weight,
    constant,
    indicator,
    lp_norm,
    random_step_function,
)
from haarlab.grid.dyadic import ROOT, DyadicInterval, dyadic_distance
from haarlab.grid.measure import build_lmp, build_random_balanced, build_uniform
from haarlab.operators.maximal import (
    c_one,
    level_set_collection,
    maximal,
    maximal_N,
    maximal_weighted,
    weak11_ratio,
)

if TYPE_CHECKING:
    from haarlab.grid.measure import MeasureTree


def test_maximal_exact(uniform: MeasureTree) -> None:
    image = maximal(uniform, indicator(DyadicInterval(2, 0)))
    assert image.value_on(DyadicInterval(2, 0)) == 1
    assert image.value_on(DyadicInterval(2, 1)) == Fraction(1, 2)
    assert image.value_on(DyadicInterval(1, 1)) == Fraction(1, 4)


def test_maximal_weighted_reduces_to_maximal(lmp: MeasureTree) -> None:
    func = random_step_function(np.random.default_rng(1), 6, 10, low=-1.0)
    unit = Weight({ROOT: 1})
    difference = maximal_weighted(lmp, unit, func) - maximal(lmp, func)
    assert float(difference.sup_norm()) == pytest.approx(0, abs=1e-12)


def test_c_one(lmp: MeasureTree) -> None:
    sibling = DyadicInterval(2, 1)
    assert c_one(lmp, sibling, sibling) == 1
    nephew = DyadicInterval(3, 1)
    expected = math.sqrt(float(lmp.m_value(sibling) * lmp.m_value(nephew)))
    expected /= float(lmp.mass(nephew))
    assert c_one(lmp, sibling, DyadicInterval(3, 1)) == pytest.approx(expected)
    assert expected == pytest.approx(math.sqrt(3) / 4)


@pytest.mark.parametrize("N", [0, 1, 2])
def test_maximal_N_dominates_maximal(lmp_float: MeasureTree, N: int) -> None:
    func = random_step_function(np.random.default_rng(N), 6, 12, low=-1.0)
    result = maximal_N(lmp_float, func, N)
    assert not result.clipped
    gap = result.value - maximal(lmp_float, func)
    assert float(gap.min_value()) >= -1e-12


def test_maximal_N_of_constant_on_uniform(uniform: MeasureTree) -> None:
    result = maximal_N(uniform, constant(1), 0)
    assert not result.clipped
    assert result.value.min_value() == result.value.sup_norm() == 1


def test_maximal_N_reaches_cousins(lmp: MeasureTree) -> None:
    result = maximal_N(lmp, indicator(DyadicInterval(2, 1)), 1)
    target = DyadicInterval(3, 1)
    assert dyadic_distance(DyadicInterval(2, 1), target) == 3
    lowest = min(val for _, val in result.value.pieces_over(target))
    assert lowest >= math.sqrt(3) / 4 - 1e-12
    for piece, (first, second) in result.attaining_pairs.items():
        assert second.contains(piece) or piece.contains(second)
        assert dyadic_distance(first, second) <= 3


def test_maximal_N_clipping_warns() -> None:
    shallow = build_lmp(4)
    with pytest.warns(UserWarning, match="clipped"):
        result = maximal_N(shallow, indicator(DyadicInterval(3, 1)), 2)
    assert result.clipped
    with pytest.raises(ValueError, match="nonnegative"):
        maximal_N(shallow, constant(1), -1)


@pytest.mark.parametrize("op", ["maximal", "maximal_n", "hilbert"])
def test_weak11_ratio(lmp_float: MeasureTree, op: str) -> None:
    rng = np.random.default_rng(2)
    func = random_step_function(rng, 6, 12, low=-1.0)
    ratio = weak11_ratio(lmp_float, op, func)
    assert ratio > 0
    if op == "maximal":
        assert ratio <= 1 + 1e-12


def test_weak11_ratio_errors(lmp: MeasureTree) -> None:
    with pytest.raises(ValueError, match="nonzero"):
        weak11_ratio(lmp, "maximal", constant(0))
    with pytest.raises(ValueError, match="unknown operator"):
        weak11_ratio(lmp, "riesz", constant(1))


def test_level_set_collection(lmp_float: MeasureTree) -> None:
    func = random_step_function(np.random.default_rng(4), 6, 10)
    family = level_set_collection(lmp_float, func, 1)
    assert len(family) > 0
    assert all(member.level < lmp_float.depth_bound for member in family)
    assert float(family.packing_constant) >= 1


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_maximal_is_sublinear(lmp: MeasureTree, seed: int) -> None:
    rng = np.random.default_rng([seed, 3])
    func = random_step_function(rng, 7, 12, low=-1, rational=True)
    other = random_step_function(rng, 8, 12, low=-1, rational=True)
    gap = maximal(lmp, func) + maximal(lmp, other) - maximal(lmp, func + other)
    assert gap.min_value() >= 0


@pytest.mark.parametrize("N", [0, 1, 2])
def test_maximal_N_is_sublinear_on_uniform(N: int) -> None:
    tree = build_uniform(14, mode="float")
    rng = np.random.default_rng([N, 4])
    func = random_step_function(rng, 5, 10, low=-1.0)
    other = random_step_function(rng, 5, 10, low=-1.0)
    total = maximal_N(tree, func + other, N)
    assert not total.clipped
    separate = maximal_N(tree, func, N).value + maximal_N(tree, other, N).value
    assert float((separate - total.value).min_value()) >= -1e-12


@pytest.mark.parametrize("N", [0, 1, 2, 3])
def test_maximal_N_of_constant_on_uniform_levels(N: int) -> None:
    # off-diagonal factors on the uniform measure peak at 2^{(N + 2) / 2} / 4
    result = maximal_N(build_uniform(12, mode="float"), constant(1), N)
    expected = max(1.0, 2 ** ((N + 2) / 2) / 4)
    assert not result.clipped
    assert float(result.value.min_value()) == pytest.approx(expected)
    assert float(result.value.sup_norm()) == pytest.approx(expected)


@pytest.mark.parametrize("N", [0, 1])
@pytest.mark.parametrize("p", [1.5, 2, 4])
def test_maximal_N_lp_bound_is_stable_in_depth(N: int, p: float) -> None:
    theta = 0.25
    # ℳ^N f <= factor ℳf pointwise on a measure with split fractions >= theta
    factor = max(1.0, theta ** (-(N + 2) / 2) / 4)
    ratios = {}
    for depth in (8, 11):
        tree = build_random_balanced(depth, seed=6, theta=theta, mode="float")
        worst = 0.0
        for trial in range(4):
            rng = np.random.default_rng([trial, 9])
            func = random_step_function(rng, 5, 10, low=-1.0)
            value = maximal_N(tree, func, N, warn=False).value
            gap = maximal(tree, func) * factor - value
            assert float(gap.min_value()) >= -1e-12
            ratio = float(lp_norm(tree, value, p) / lp_norm(tree, func, p))
            worst = max(worst, ratio)
        assert 1 - 1e-12 <= worst <= factor * p / (p - 1) + 1e-9
        ratios[depth] = worst
    assert ratios[8] - 1e-12 <= ratios[11] <= ratios[8] + factor + 1e-9


@pytest.mark.parametrize("j", [4, 6, 9])
def test_maximal_pointwise_on_chain(lmp: MeasureTree, j: int) -> None:
    # f_j = 1 on I_{j-1}^b, where I_k = (k, 0) and I_k^b = (k, 1)
    mass = lmp.mass(DyadicInterval(j - 1, 1))
    image = maximal(lmp, indicator(DyadicInterval(j - 1, 1)))
    for k in range(1, j - 1):
        expected = mass / lmp.mass(DyadicInterval(k - 1, 0))
        assert image.value_on(DyadicInterval(k, 1)) == expected
    assert image.value_on(DyadicInterval(j - 1, 1)) == 1
    near = mass / lmp.mass(DyadicInterval(j - 2, 0))
    for k in range(j, 12):
        assert image.value_on(DyadicInterval(k, 1)) == near


@pytest.mark.parametrize("j", [5, 8, 11])
def test_maximal_one_pointwise_on_chain(lmp_float: MeasureTree, j: int) -> None:
    mass = float(lmp_float.mass(DyadicInterval(j - 1, 1)))
    result = maximal_N(lmp_float, indicator(DyadicInterval(j - 1, 1)), 1, warn=False)
    for k in range(1, j - 2):
        scale = mass / float(lmp_float.mass(DyadicInterval(k - 1, 0)))
        pieces = result.value.pieces_over(DyadicInterval(k, 1))
        ratios = [val / scale for _, val in pieces]
        assert min(ratios) >= 1 - 1e-12
        assert max(ratios) <= 2
