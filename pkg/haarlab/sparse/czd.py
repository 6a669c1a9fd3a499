from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from haarlab.functions.stepfn import DyadicStepFunction, constant, indicator

if TYPE_CHECKING:
    from haarlab import Number
    from haarlab.grid.dyadic import DyadicInterval
    from haarlab.grid.measure import MeasureTree

DEFAULT_MULTIPLIER = 16


@dataclass
class CZDecomposition:
    """Two-function Calderón-Zygmund decomposition f_j = g_j + Σ_k b_{j,k} inside top.

    b_{j,k} = f_j 1_{I_k} - (∫_{I_k} f_j dμ / μ(Î_k)) 1_{Î_k} is supported on the
    parent of the selected interval I_k and has mean zero.
    """

    top: DyadicInterval
    heights: tuple[Number, Number]
    functions: tuple[DyadicStepFunction, DyadicStepFunction]
    selected: list[DyadicInterval] = field(default_factory=list)
    good: tuple[DyadicStepFunction, DyadicStepFunction] | None = None
    bad: dict[DyadicInterval, tuple[DyadicStepFunction, DyadicStepFunction]] = field(
        default_factory=dict
    )

    def bad_part(self, j: int) -> DyadicStepFunction:
        """b_j = Σ_k b_{j,k} for j in {0, 1}."""
        total = constant(0)
        for pair in self.bad.values():
            total = total + pair[j]
        return total

    def reconstruction_error(self) -> Number:
        """max_j sup |f_j - g_j - b_j|, zero in rational mode."""
        return max(
            (func - good - self.bad_part(j)).sup_norm()
            for j, (func, good) in enumerate(zip(self.functions, self.good))
        )


def _check_inputs(
    tree: MeasureTree,
    funcs: tuple[DyadicStepFunction, DyadicStepFunction],
    heights: tuple[Number, Number],
    top: DyadicInterval,
) -> None:
    for j, (func, height) in enumerate(zip(funcs, heights), start=1):
        if func.min_value() < 0:
            raise ValueError(
                f"f{j} must be nonnegative, got min value {func.min_value()}"
            )
        for cell in func.support():
            if not top.contains(cell):
                raise ValueError(f"f{j} is not supported inside {top}, see cell {cell}")
        if height < 0:
            raise ValueError(f"height lambda{j}={height} must be nonnegative")
        avg = func.integrals(tree).average(top)
        if avg != 0 and height <= avg:
            raise ValueError(
                f"lambda{j}={height} must exceed the average {avg} on {top}"
            )


def select_intervals(
    tree: MeasureTree,
    f1: DyadicStepFunction,
    f2: DyadicStepFunction,
    lam1: Number,
    lam2: Number,
    top: DyadicInterval,
) -> list[DyadicInterval]:
    """Maximal J ⊊ top with ⟨f1⟩_J > lam1 or ⟨f2⟩_J > lam2, left to right.

    The search only descends where f1 or f2 is not constant, since on a
    constant stretch no subinterval can have a larger average.
    """
    first, second = f1.integrals(tree), f2.integrals(tree)
    selected = []
    stack = [top]
    while stack:
        node = stack.pop()
        for child in reversed(node.children):
            if first.average(child) > lam1 or second.average(child) > lam2:
                selected.append(child)
            elif not (f1.is_constant_on(child) and f2.is_constant_on(child)):
                stack.append(child)
    scale = max((interval.level for interval in selected), default=0)
    return sorted(selected, key=lambda interval: interval.left_key(scale))


def cz_decompose(
    tree: MeasureTree,
    f1: DyadicStepFunction,
    f2: DyadicStepFunction,
    lam1: Number,
    lam2: Number,
    top: DyadicInterval,
) -> CZDecomposition:
    """Decompose f1, f2 at heights lam1, lam2 inside top.

    Args:
        tree (MeasureTree): the measure
        f1 (DyadicStepFunction): nonnegative, supported inside top
        f2 (DyadicStepFunction): nonnegative, supported inside top
        lam1 (Number): height for f1, above ⟨f1⟩_top unless that average is 0
        lam2 (Number): height for f2, above ⟨f2⟩_top unless that average is 0
        top (DyadicInterval): the ambient interval

    Returns:
        CZDecomposition: selected intervals, good and bad parts

    Raises:
        ValueError: if a precondition fails
    """
    funcs, heights = (f1, f2), (lam1, lam2)
    _check_inputs(tree, funcs, heights, top)
    selected = select_intervals(tree, f1, f2, lam1, lam2, top)
    decomposition = CZDecomposition(top, heights, funcs, selected)
    goods = [f1, f2]
    for interval in selected:
        parent = interval.parent
        pair = []
        for j, func in enumerate(funcs):
            share = func.integrals(tree).integral(interval) / tree.mass(parent)
            bad = func.restrict(interval) - share * indicator(parent)
            goods[j] = goods[j] - bad
            pair.append(bad)
        decomposition.bad[interval] = (pair[0], pair[1])
    decomposition.good = (goods[0], goods[1])
    return decomposition


def _heights(
    tree: MeasureTree,
    f1: DyadicStepFunction,
    f2: DyadicStepFunction,
    interval: DyadicInterval,
    multiplier: Number,
) -> tuple[Number, Number]:
    return (
        multiplier * f1.integrals(tree).average(interval),
        multiplier * f2.integrals(tree).average(interval),
    )


def stopping_children(
    tree: MeasureTree,
    f1: DyadicStepFunction,
    f2: DyadicStepFunction,
    interval: DyadicInterval,
    multiplier: Number = DEFAULT_MULTIPLIER,
) -> list[DyadicInterval]:
    """ℬ(I): the intervals selected at heights multiplier ⟨f_j⟩_I.

    Empty when both averages vanish.
    """
    lam1, lam2 = _heights(tree, f1, f2, interval, multiplier)
    if lam1 == 0 and lam2 == 0:
        return []
    return select_intervals(tree, f1, f2, lam1, lam2, interval)


def stopping_family(
    tree: MeasureTree,
    f1: DyadicStepFunction,
    f2: DyadicStepFunction,
    top: DyadicInterval,
    k: int = 0,
    multiplier: Number = DEFAULT_MULTIPLIER,
) -> list[DyadicInterval]:
    """ℬ_k(I): ℬ_0(I) = ℬ(I) and ℬ_k(I) is the union of ℬ(J) over J in ℬ_{k-1}(I).

    Raises:
        ValueError: if k < 0
    """
    if k < 0:
        raise ValueError(f"{k=} must be nonnegative")
    family = stopping_children(tree, f1, f2, top, multiplier)
    for _ in range(k):
        family = [
            child
            for member in family
            for child in stopping_children(tree, f1, f2, member, multiplier)
        ]
    return family


def stopping_union(
    tree: MeasureTree,
    f1: DyadicStepFunction,
    f2: DyadicStepFunction,
    top: DyadicInterval,
    N: int,
    multiplier: Number = DEFAULT_MULTIPLIER,
) -> list[DyadicInterval]:
    """ℬ^N(I), the union of ℬ_k(I) for k = 0, ..., N."""
    out: list[DyadicInterval] = []
    family = stopping_children(tree, f1, f2, top, multiplier)
    for _ in range(N + 1):
        out.extend(family)
        family = [
            child
            for member in family
            for child in stopping_children(tree, f1, f2, member, multiplier)
        ]
    return out


class GoodRegion:
    """Membership in 𝒢(I): intervals inside I not contained in a member of ℬ(I)."""

    def __init__(
        self,
        tree: MeasureTree,
        f1: DyadicStepFunction,
        f2: DyadicStepFunction,
        top: DyadicInterval,
        multiplier: Number = DEFAULT_MULTIPLIER,
    ) -> None:
        """Run the stopping search once."""
        self.top = top
        self.stopped = set(stopping_children(tree, f1, f2, top, multiplier))

    def __contains__(self, interval: DyadicInterval) -> bool:
        return self(interval)

    def __call__(self, interval: DyadicInterval) -> bool:
        """Whether interval ∈ 𝒢(I)."""
        if not self.top.contains(interval):
            return False
        if interval in self.stopped:
            return False
        return not any(
            ancestor in self.stopped
            for ancestor in interval.ancestors()
            if ancestor.level > self.top.level
        )


def good_region(
    tree: MeasureTree,
    f1: DyadicStepFunction,
    f2: DyadicStepFunction,
    top: DyadicInterval,
    multiplier: Number = DEFAULT_MULTIPLIER,
) -> GoodRegion:
    """The predicate J ↦ [J ∈ 𝒢(I)]."""
    return GoodRegion(tree, f1, f2, top, multiplier)
