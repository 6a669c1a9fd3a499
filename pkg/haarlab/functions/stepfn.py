from __future__ import annotations

import math
import weakref
from bisect import bisect_left, bisect_right
from collections import defaultdict
from fractions import Fraction
from typing import TYPE_CHECKING, Any

from haarlab.grid.dyadic import ROOT, DyadicInterval
from haarlab.utils.common_utils import read_json
from haarlab.utils.literals import format_fraction, parse_fraction

if TYPE_CHECKING:
    from collections.abc import Callable, Iterator, Mapping

    import numpy as np
    from typing_extensions import Self

    from haarlab import Number
    from haarlab.grid.measure import MeasureTree


class DyadicStepFunction:
    """A finite linear combination of indicators of dyadic intervals.

    The function is stored in canonical form: its cells partition the root and
    no two sibling cells carry the same value, so two functions are equal iff
    their canonical cell maps are identical.
    """

    def __init__(self, pieces: Mapping[DyadicInterval, Number]) -> None:
        """Initialize a step function from a partition of the root.

        Args:
            pieces (Mapping[DyadicInterval, Number]): cell -> value, the cells
                must be pairwise disjoint and cover [0, 1)

        Raises:
            ValueError: if the cells do not partition the root
        """
        if not pieces:
            raise ValueError("a step function needs at least one cell")
        values = _canonical(pieces)
        self.max_level = max(cell.level for cell in values)
        cells = sorted(values, key=lambda cell: cell.left_key(self.max_level))
        expected = 0
        for cell in cells:
            if cell.left_key(self.max_level) != expected:
                raise ValueError(f"cells do not partition the root near {cell}")
            expected = cell.right_key(self.max_level)
        if expected != 1 << self.max_level:
            raise ValueError("cells do not cover the root")
        self._values = values
        self._cells = cells
        self._keys = [cell.left_key(self.max_level) for cell in cells]
        self._tables: weakref.WeakKeyDictionary[MeasureTree, IntegralTable] = (
            weakref.WeakKeyDictionary()
        )

    @classmethod
    def from_pieces(
        cls, pieces: Mapping[DyadicInterval, Number], fill: Number = 0
    ) -> Self:
        """Complete disjoint cells to a partition of the root with a fill value.

        Args:
            pieces (Mapping[DyadicInterval, Number]): pairwise disjoint cells
            fill (Number): value on the complement of the cells. Default = 0

        Returns:
            the completed function
        """
        if not pieces:
            return cls({ROOT: fill})
        path: set[DyadicInterval] = set()
        for cell in pieces:
            node = cell
            while node not in path:
                path.add(node)
                if node.is_root:
                    break
                node = node.parent
        completed = dict(pieces)
        for node in path:
            if not node.is_root and (other := node.sibling) not in path:
                completed[other] = fill
        return cls(completed)

    def __repr__(self) -> str:
        """String representation of the function."""
        n_cells, max_level = len(self._cells), self.max_level
        return f"{type(self).__name__}({n_cells=}, {max_level=})"

    def __eq__(self, other: object) -> bool:
        """Equality of canonical forms."""
        if not isinstance(other, DyadicStepFunction):
            return NotImplemented
        return self._values == other._values

    __hash__ = None  # type: ignore[assignment]

    def __len__(self) -> int:
        """Number of cells."""
        return len(self._cells)

    def __iter__(self) -> Iterator[tuple[DyadicInterval, Number]]:
        """(cell, value) pairs from left to right."""
        for cell in self._cells:
            yield cell, self._values[cell]

    @property
    def cells(self) -> list[DyadicInterval]:
        """The canonical cells from left to right."""
        return list(self._cells)

    def items(self) -> list[tuple[DyadicInterval, Number]]:
        """(cell, value) pairs from left to right."""
        return list(self)

    def values(self) -> list[Number]:
        """Cell values from left to right."""
        return [self._values[cell] for cell in self._cells]

    def cell_of(self, interval: DyadicInterval) -> DyadicInterval | None:
        """The cell containing interval, or None if interval splits into cells."""
        probe = interval
        if probe.level > self.max_level:
            probe = probe.ancestor(probe.level - self.max_level)
        pos = bisect_right(self._keys, probe.left_key(self.max_level)) - 1
        cell = self._cells[pos]
        return cell if cell.contains(interval) else None

    def value_on(self, interval: DyadicInterval) -> Number:
        """The value of f on an interval where f is constant.

        Raises:
            ValueError: if f is not constant on interval
        """
        cell = self.cell_of(interval)
        if cell is None:
            raise ValueError(f"function is not constant on {interval}")
        return self._values[cell]

    def is_constant_on(self, interval: DyadicInterval) -> bool:
        """Whether f takes a single value on interval."""
        return self.cell_of(interval) is not None

    def pieces_over(
        self, interval: DyadicInterval
    ) -> list[tuple[DyadicInterval, Number]]:
        """A partition of interval into intervals where f is constant, with values."""
        cell = self.cell_of(interval)
        if cell is not None:
            return [(interval, self._values[cell])]
        lo = bisect_left(self._keys, interval.left_key(self.max_level))
        hi = bisect_left(self._keys, interval.right_key(self.max_level))
        return [(sub, self._values[sub]) for sub in self._cells[lo:hi]]

    def support(self) -> list[DyadicInterval]:
        """Cells where f is nonzero."""
        return [cell for cell in self._cells if self._values[cell] != 0]

    def map(self, func: Callable[[Number], Number]) -> DyadicStepFunction:
        """Apply func to every value."""
        return DyadicStepFunction({cell: func(val) for cell, val in self})

    def restrict(self, interval: DyadicInterval) -> DyadicStepFunction:
        """f · 1_I."""
        return DyadicStepFunction.from_pieces(dict(self.pieces_over(interval)))

    def _combine(
        self, other: DyadicStepFunction, func: Callable[[Number, Number], Number]
    ) -> DyadicStepFunction:
        """Apply func cellwise on the common refinement of two partitions."""
        out: dict[DyadicInterval, Number] = {}
        mine, theirs = self._cells, other._cells
        i = j = 0
        while i < len(mine):
            a, b = mine[i], theirs[j]
            value = func(self._values[a], other._values[b])
            if a == b:
                out[a] = value
                i += 1
                j += 1
            elif a.contains(b):
                out[b] = value
                j += 1
                if a.right_key(b.level) == b.index + 1:
                    i += 1
            else:
                out[a] = value
                i += 1
                if b.right_key(a.level) == a.index + 1:
                    j += 1
        return DyadicStepFunction(out)

    def _binary(
        self,
        other: DyadicStepFunction | Number,
        func: Callable[[Number, Number], Number],
    ) -> DyadicStepFunction:
        if isinstance(other, DyadicStepFunction):
            return self._combine(other, func)
        if isinstance(other, (int, float, Fraction)):
            return self.map(lambda val: func(val, other))
        return NotImplemented

    def __add__(self, other: DyadicStepFunction | Number) -> DyadicStepFunction:
        return self._binary(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other: DyadicStepFunction | Number) -> DyadicStepFunction:
        return self._binary(other, lambda a, b: a - b)

    def __rsub__(self, other: Number) -> DyadicStepFunction:
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other: DyadicStepFunction | Number) -> DyadicStepFunction:
        return self._binary(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other: DyadicStepFunction | Number) -> DyadicStepFunction:
        return self._binary(other, lambda a, b: a / b)

    def __neg__(self) -> DyadicStepFunction:
        return self.map(lambda val: -val)

    def __abs__(self) -> DyadicStepFunction:
        return self.map(abs)

    def __pow__(self, exponent: float) -> DyadicStepFunction:
        return self.map(lambda val: val**exponent)

    def maximum(self, other: DyadicStepFunction) -> DyadicStepFunction:
        """Pointwise max."""
        return self._combine(other, max)

    def sup_norm(self) -> Number:
        """max |f|."""
        return max(abs(val) for val in self._values.values())

    def min_value(self) -> Number:
        """min f."""
        return min(self._values.values())

    def integrals(self, tree: MeasureTree) -> IntegralTable:
        """The memoized table of integrals of f over dyadic intervals."""
        table = self._tables.get(tree)
        if table is None:
            table = self._tables[tree] = IntegralTable(tree, self)
        return table


class IntegralTable:
    """Integrals of one step function over dyadic intervals, for one measure.

    Every dyadic interval either lies inside a cell or is a union of cells. The
    table stores the integral over every cell and every strict ancestor of a
    cell, accumulated bottom-up, and answers the other intervals from the value
    of their cell.
    """

    def __init__(self, tree: MeasureTree, func: DyadicStepFunction) -> None:
        """Accumulate the integrals of func under tree."""
        self.tree = tree
        self.func = func
        sums: dict[DyadicInterval, Number] = {}
        by_level: dict[int, list[DyadicInterval]] = defaultdict(list)
        for cell, value in func:
            sums[cell] = value * tree.mass(cell)
            by_level[cell.level].append(cell)
        for level in range(func.max_level, 0, -1):
            for node in by_level.get(level, ()):
                parent = node.parent
                if parent in sums:
                    sums[parent] += sums[node]
                else:
                    sums[parent] = sums[node]
                    by_level[level - 1].append(parent)
        self._sums = sums

    def integral(self, interval: DyadicInterval) -> Number:
        """∫_I f dμ."""
        if interval in self._sums:
            return self._sums[interval]
        return self.func.value_on(interval) * self.tree.mass(interval)

    def average(self, interval: DyadicInterval) -> Number:
        """⟨f⟩_I."""
        return self.integral(interval) / self.tree.mass(interval)

    def nodes(self) -> list[DyadicInterval]:
        """Cells and their strict ancestors."""
        return list(self._sums)

    def internal_nodes(self) -> list[DyadicInterval]:
        """Strict ancestors of cells, the intervals where f is not constant."""
        return [node for node in self._sums if self.func.cell_of(node) is None]


def _canonical(pieces: Mapping[DyadicInterval, Number]) -> dict[DyadicInterval, Number]:
    """Merge equal-valued siblings bottom-up."""
    values = dict(pieces)
    by_level: dict[int, list[DyadicInterval]] = defaultdict(list)
    for cell in values:
        by_level[cell.level].append(cell)
    for level in range(max(by_level), 0, -1):
        for cell in by_level.get(level, ()):
            if cell not in values or not cell.is_left:
                continue
            other = cell.sibling
            if other in values and values[other] == values[cell]:
                value = values.pop(cell)
                del values[other]
                parent = cell.parent
                values[parent] = value
                by_level[level - 1].append(parent)
    return values


class Weight(DyadicStepFunction):
    """A strictly positive step function."""

    def __init__(self, pieces: Mapping[DyadicInterval, Number]) -> None:
        """Initialize a weight.

        Raises:
            ValueError: if some cell value is not positive
        """
        super().__init__(pieces)
        if (low := self.min_value()) <= 0:
            raise ValueError(f"weights must be positive, got min value {low}")

    @classmethod
    def from_function(cls, func: DyadicStepFunction) -> Self:
        """View a positive step function as a weight."""
        return cls(dict(func))

    def power(self, exponent: float) -> Weight:
        """w^exponent, still a weight."""
        return Weight({cell: val**exponent for cell, val in self})

    def dual(self, p: float) -> Weight:
        """σ = w^{1 - p'} with p' = p / (p - 1)."""
        if p <= 1:
            raise ValueError(f"dual weight needs {p=} > 1")
        return self.power(1 - conjugate_exponent(p))


def conjugate_exponent(p: float) -> float:
    """p' = p / (p - 1), with 1' = ∞."""
    return math.inf if p == 1 else p / (p - 1)


def indicator(interval: DyadicInterval) -> DyadicStepFunction:
    """1_I."""
    return DyadicStepFunction.from_pieces({interval: 1})


def constant(value: Number) -> DyadicStepFunction:
    """c · 1_root."""
    return DyadicStepFunction({ROOT: value})


def average(
    tree: MeasureTree, func: DyadicStepFunction, interval: DyadicInterval
) -> Number:
    """⟨f⟩_I = (1 / μ(I)) ∫_I f dμ."""
    return func.integrals(tree).average(interval)


def integral(tree: MeasureTree, func: DyadicStepFunction) -> Number:
    """∫ f dμ over the root."""
    return func.integrals(tree).integral(ROOT)


def integral_over(
    tree: MeasureTree, func: DyadicStepFunction, interval: DyadicInterval
) -> Number:
    """∫_I f dμ."""
    return func.integrals(tree).integral(interval)


def inner(
    tree: MeasureTree, first: DyadicStepFunction, second: DyadicStepFunction
) -> Number:
    """⟨f, g⟩ = ∫ f g dμ."""
    return integral(tree, first * second)


def lp_norm(
    tree: MeasureTree,
    func: DyadicStepFunction,
    p: float = 2,
    weight: DyadicStepFunction | None = None,
) -> Number:
    """(∫ |f|^p w dμ)^{1/p}, or max |f| for p = ∞.

    Raises:
        ValueError: if p < 1
    """
    if p < 1:
        raise ValueError(f"{p=} must be at least 1")
    if math.isinf(p):
        return func.sup_norm()
    powered = abs(func) if p == 1 else abs(func) ** p
    if weight is not None:
        powered = powered * weight
    total = integral(tree, powered)
    return total if p == 1 else total ** (1 / p)


def weighted_measure(
    tree: MeasureTree, weight: DyadicStepFunction | None, interval: DyadicInterval
) -> Number:
    """w(I) = ∫_I w dμ, or μ(I) without a weight."""
    if weight is None:
        return tree.mass(interval)
    return integral_over(tree, weight, interval)


def bmo_norm(
    tree: MeasureTree, func: DyadicStepFunction, depth: int | None = None
) -> Number:
    """Martingale BMO norm sup_I (1 / μ(I)) ∫_I |f - ⟨f⟩_Î| dμ over non-root I.

    Subtrees where f is constant on Î contribute zero and are pruned, so the scan
    is exact once depth reaches the finest cell level of f.

    Args:
        tree (MeasureTree): the measure
        func (DyadicStepFunction): the function
        depth (int | None): deepest level of I. Default = None (finest cell level)

    Returns:
        Number: the supremum, 0 for constants
    """
    depth = func.max_level if depth is None else depth
    depth = min(depth, tree.depth_bound)
    table = func.integrals(tree)
    best: Number = tree.number(0)
    stack = [ROOT] if not func.is_constant_on(ROOT) else []
    while stack:
        parent = stack.pop()
        parent_avg = table.average(parent)
        for child in parent.children:
            if child.level > depth:
                continue
            total = sum(
                abs(val - parent_avg) * tree.mass(piece)
                for piece, val in func.pieces_over(child)
            )
            best = max(best, total / tree.mass(child))
            if not func.is_constant_on(child):
                stack.append(child)
    return best


def distribution(
    tree: MeasureTree,
    func: DyadicStepFunction,
    weight: DyadicStepFunction | None = None,
) -> list[tuple[Number, Number]]:
    """(v, w{|f| >= v}) for every distinct value v of |f|, in decreasing v."""
    mass_by_value: dict[Number, Number] = defaultdict(lambda: tree.number(0))
    for cell, val in func:
        mass_by_value[abs(val)] += weighted_measure(tree, weight, cell)
    out = []
    running = tree.number(0)
    for val in sorted(mass_by_value, reverse=True):
        running += mass_by_value[val]
        out.append((val, running))
    return out


def random_step_function(
    rng: np.random.Generator,
    max_level: int,
    splits: int = 8,
    *,
    low: float = 0.0,
    high: float = 1.0,
    support: DyadicInterval = ROOT,
    rational: bool = False,
) -> DyadicStepFunction:
    """Random step function obtained by splitting random cells of support.

    Args:
        rng (np.random.Generator): source of randomness
        max_level (int): deepest cell level
        splits (int): number of cell splits. Default = 8
        low (float): smallest value. Default = 0
        high (float): largest value. Default = 1
        support (DyadicInterval): the function vanishes outside. Default = root
        rational (bool): draw values on a 1/8 grid as Fractions. Default = False

    Returns:
        DyadicStepFunction: the random function
    """
    cells = [support]
    for _ in range(splits):
        candidates = [cell for cell in cells if cell.level < max_level]
        if not candidates:
            break
        chosen = candidates[int(rng.integers(len(candidates)))]
        cells.remove(chosen)
        cells.extend(chosen.children)
    if rational:
        span = Fraction(high) - Fraction(low)
        steps = rng.integers(0, 9, size=len(cells))
        values = [Fraction(low) + span * Fraction(int(step), 8) for step in steps]
    else:
        values = [float(rng.uniform(low, high)) for _ in cells]
    return DyadicStepFunction.from_pieces(dict(zip(cells, values)), fill=0)


def random_weight(
    rng: np.random.Generator,
    max_level: int,
    splits: int = 8,
    *,
    spread: float = 4.0,
) -> Weight:
    """Random weight with log2-uniform values in [2^-spread, 2^spread]."""
    shape = random_step_function(rng, max_level, splits, low=-spread, high=spread)
    return Weight.from_function(shape.map(lambda val: 2.0**val))


def function_to_records(func: DyadicStepFunction) -> list[dict[str, Any]]:
    """The JSON literal [{"interval": "L:IDX", "value": v}, ...]."""
    return [
        {"interval": str(cell), "value": format_fraction(val)} for cell, val in func
    ]


def function_from_records(
    records: list[dict[str, Any]], *, exact: bool = False
) -> DyadicStepFunction:
    """Parse the JSON function literal, validated as a partition."""
    pieces: dict[DyadicInterval, Number] = {}
    for record in records:
        cell = DyadicInterval.from_str(record["interval"])
        if cell in pieces:
            raise ValueError(f"duplicate cell {cell} in function literal")
        value = record["value"]
        if exact or isinstance(value, str):
            value = parse_fraction(value)
        pieces[cell] = value
    return DyadicStepFunction(pieces)


def load_function(path: str, *, exact: bool = False) -> DyadicStepFunction:
    """Read a JSON function literal."""
    return function_from_records(read_json(path), exact=exact)


def load_weight(path: str, *, exact: bool = False) -> Weight:
    """Read a JSON weight literal, validating positivity."""
    return Weight.from_function(load_function(path, exact=exact))
