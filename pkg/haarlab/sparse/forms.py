from __future__ import annotations

import math
from typing import TYPE_CHECKING

from haarlab.functions.stepfn import DyadicStepFunction, lp_norm, weighted_measure
from haarlab.grid.dyadic import ROOT, cousins, descendants_at
from haarlab.operators.maximal import maximal_N, weak11_ratio

if TYPE_CHECKING:
    from collections.abc import Iterable

    from haarlab import Number
    from haarlab.grid.dyadic import DyadicInterval
    from haarlab.grid.measure import MeasureTree


def _members(family: Iterable[DyadicInterval]) -> list[DyadicInterval]:
    return sorted(set(family))


def form_A(
    tree: MeasureTree,
    family: Iterable[DyadicInterval],
    f1: DyadicStepFunction,
    f2: DyadicStepFunction,
) -> Number:
    """𝒜_S(f1, f2) = Σ_{I∈S} ⟨f1⟩_I ⟨f2⟩_I μ(I)."""
    first, second = f1.integrals(tree), f2.integrals(tree)
    total = tree.number(0)
    for interval in _members(family):
        total += first.average(interval) * second.integral(interval)
    return total


def form_C_N(
    tree: MeasureTree,
    family: Iterable[DyadicInterval],
    f1: DyadicStepFunction,
    f2: DyadicStepFunction,
    N: int,
) -> float:
    """𝒞_S^N(f1, f2) = Σ ⟨f1⟩_J ⟨f2⟩_K √(m(J) m(K)).

    The sum runs over ordered pairs J, K ∈ S of disjoint intervals with
    2 < dist(J, K) <= N + 2, so 𝒞_S^0 vanishes identically.

    Raises:
        ValueError: if a member lies at the depth bound
    """
    members = _members(family)
    member_set = set(members)
    root_m = {member: math.sqrt(tree.m_value(member)) for member in members}
    if N <= 0:
        return 0.0
    first, second = f1.integrals(tree), f2.integrals(tree)
    total = 0.0
    for interval in members:
        left_avg = first.average(interval)
        if left_avg == 0:
            continue
        for other in cousins(interval, N, tree.depth_bound - 1):
            if other in member_set:
                right_avg = second.average(other)
                total += float(left_avg * right_avg) * root_m[interval] * root_m[other]
    return total


def form_C_intro(
    tree: MeasureTree,
    family: Iterable[DyadicInterval],
    f1: DyadicStepFunction,
    f2: DyadicStepFunction,
) -> Number:
    """𝒞_S(f1, f2) = Σ_{I∈S} Σ_{J∈S∩𝒟_{<=2}(Î)} (⟨f1⟩_I ⟨f2⟩_J + ⟨f2⟩_I ⟨f1⟩_J) m(I).

    For the root, Î is read as the root itself.

    Raises:
        ValueError: if a member lies at the depth bound
    """
    members = _members(family)
    member_set = set(members)
    first, second = f1.integrals(tree), f2.integrals(tree)
    total = tree.number(0)
    for interval in members:
        m = tree.m_value(interval)
        top = ROOT if interval.is_root else interval.parent
        a1, a2 = first.average(interval), second.average(interval)
        for depth in range(3):
            if top.level + depth > tree.depth_bound:
                break
            for other in descendants_at(top, depth):
                if other in member_set:
                    cross = a1 * second.average(other) + a2 * first.average(other)
                    total += cross * m
    return total


def form_hilbert_refined(
    tree: MeasureTree,
    family: Iterable[DyadicInterval],
    f1: DyadicStepFunction,
    f2: DyadicStepFunction,
) -> Number:
    """Σ_{I∈S} ⟨f1⟩_I ⟨f2⟩_I μ(I) + Σ_{I∈S, I^b_±∈S} ⟨f1⟩_I ⟨f2⟩_{I^b_±} m(I).

    I^b_± are the children of the sibling of I.
    """
    members = _members(family)
    member_set = set(members)
    first, second = f1.integrals(tree), f2.integrals(tree)
    total = form_A(tree, members, f1, f2)
    for interval in members:
        if interval.is_root:
            continue
        nephews = [child for child in interval.sibling.children if child in member_set]
        if not nephews:
            continue
        m = tree.m_value(interval)
        for nephew in nephews:
            total += first.average(interval) * second.average(nephew) * m
    return total


def weak_type_functional(
    tree: MeasureTree,
    family: Iterable[DyadicInterval],
    f1: DyadicStepFunction,
    G: DyadicStepFunction | Iterable[DyadicInterval],
    N: int,
    weight: DyadicStepFunction | None = None,
    *,
    c0: float | None = None,
) -> tuple[float, Number, Number]:
    """𝒞_S^N(|f1|, w 1_{G'}) for G' = G minus H, H = {ℳ^N f1 > C_0 / w(G)}.

    C_0 defaults to twice the weak-type constant of ℳ^N measured on f1 alone
    times ‖f1‖_{L¹(w)}, which guarantees w(H) <= w(G) / 2 and so
    w(G) <= 2 w(G'). The default therefore changes with f1. Pass c0 to hold
    C_0 fixed across several functions; any c0 at least the default keeps the
    guarantee.
    Since the form is monotone in f2 >= 0, 1_{G'} is the worst f2.

    Args:
        tree (MeasureTree): the measure
        family (Iterable[DyadicInterval]): the sparse family S
        f1 (DyadicStepFunction): the L¹ function
        G (DyadicStepFunction | Iterable[DyadicInterval]): the set, as an
            indicator or as disjoint cells
        N (int): the complexity
        weight (DyadicStepFunction | None): use w dμ. Default = None
        c0 (float | None): the height constant. Default = None (measured)

    Returns:
        tuple[float, Number, Number]: (value, w(G), w(G'))

    Raises:
        ValueError: if G is null
    """
    if not isinstance(G, DyadicStepFunction):
        G = DyadicStepFunction.from_pieces({cell: 1 for cell in G})
    mass_g = _set_measure(tree, G, weight)
    if mass_g == 0:
        raise ValueError("weak_type_functional needs a set G of positive measure")
    maximal_value = maximal_N(tree, f1, N, warn=False).value
    if c0 is None:
        norm = float(lp_norm(tree, f1, 1, weight))
        c0 = 2 * weak11_ratio(
            tree, lambda _tree, _func: maximal_value, f1, weight=weight
        ) * norm
    height = c0 / float(mass_g)
    outside_h = maximal_value.map(lambda val: 0 if val > height else 1)
    g_prime = G * outside_h
    mass_g_prime = _set_measure(tree, g_prime, weight)
    second = g_prime if weight is None else g_prime * weight
    value = form_C_N(tree, family, abs(f1), second, N)
    return value, mass_g, mass_g_prime


def _set_measure(
    tree: MeasureTree, marker: DyadicStepFunction, weight: DyadicStepFunction | None
) -> Number:
    return sum(
        (weighted_measure(tree, weight, cell) for cell, val in marker if val != 0),
        tree.number(0),
    )

