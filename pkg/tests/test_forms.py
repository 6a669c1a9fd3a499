from __future__ import annotations

import math
from fractions import Fraction
from typing import TYPE_CHECKING

import numpy as np
import pytest

from haarlab.functions.stepfn import constant, indicator, random_step_function
from haarlab.grid.dyadic import ROOT, DyadicInterval
from haarlab.operators.maximal import level_set_collection
from haarlab.sparse.forms import (
    form_A,
    form_C_intro,
    form_C_N,
    form_hilbert_refined,
    weak_type_functional,
)

if TYPE_CHECKING:
    from haarlab.grid.measure import MeasureTree


def test_form_A(uniform: MeasureTree) -> None:
    func = indicator(DyadicInterval(1, 0))
    assert form_A(uniform, [ROOT, DyadicInterval(1, 0)], func, func) == Fraction(3, 4)
    assert form_A(uniform, [], func, func) == 0


def test_form_C_N(lmp: MeasureTree) -> None:
    members = [DyadicInterval(2, 1), DyadicInterval(3, 1)]
    func = indicator(DyadicInterval(2, 1)) + indicator(DyadicInterval(3, 1))
    assert form_C_N(lmp, members, func, func, 0) == 0
    expected = 2 * math.sqrt(Fraction(1, 16) * Fraction(1, 48))
    assert form_C_N(lmp, members, func, func, 1) == pytest.approx(expected)
    # nested members are never paired
    nested = [DyadicInterval(1, 0), DyadicInterval(3, 1)]
    assert form_C_N(lmp, nested, func, func, 3) == 0


def test_form_C_N_requires_internal_members(lmp: MeasureTree) -> None:
    func = constant(1)
    with pytest.raises(ValueError, match="internal"):
        form_C_N(lmp, [DyadicInterval(12, 0)], func, func, 1)


def test_form_C_intro(uniform: MeasureTree) -> None:
    func = constant(1)
    members = [DyadicInterval(1, 0), DyadicInterval(1, 1)]
    assert form_C_intro(uniform, members, func, func) == 1
    assert form_C_intro(uniform, [ROOT], func, func) == Fraction(1, 2)


def test_form_hilbert_refined(uniform: MeasureTree) -> None:
    func = constant(1)
    members = [DyadicInterval(1, 0), DyadicInterval(2, 2)]
    assert form_hilbert_refined(uniform, members, func, func) == Fraction(7, 8)
    assert form_hilbert_refined(uniform, [ROOT], func, func) == 1


def test_weak_type_functional(lmp_float: MeasureTree) -> None:
    rng = np.random.default_rng(8)
    func = random_step_function(rng, 6, 10, low=-1.0)
    family = level_set_collection(lmp_float, func, 1)
    region = [DyadicInterval(1, 1), DyadicInterval(3, 0)]
    value, mass_g, mass_g_prime = weak_type_functional(
        lmp_float, family, func, region, 1
    )
    assert value >= 0
    assert mass_g == pytest.approx(0.5 + 1 / 6)
    assert mass_g <= 2 * mass_g_prime + 1e-12
    with pytest.raises(ValueError, match="positive measure"):
        weak_type_functional(lmp_float, family, func, [], 1)


def test_weak_type_functional_fixed_height(lmp_float: MeasureTree) -> None:
    rng = np.random.default_rng(8)
    func = random_step_function(rng, 6, 10, low=-1.0)
    family = level_set_collection(lmp_float, func, 1)
    region = [DyadicInterval(1, 1), DyadicInterval(3, 0)]
    measured, _, measured_mass = weak_type_functional(
        lmp_float, family, func, region, 1
    )
    # a height above every value of ℳ^N f removes nothing from G
    value, mass_g, mass_g_prime = weak_type_functional(
        lmp_float, family, func, region, 1, c0=1e9
    )
    assert mass_g_prime == pytest.approx(mass_g)
    assert mass_g_prime >= measured_mass - 1e-12
    assert value >= measured - 1e-12
