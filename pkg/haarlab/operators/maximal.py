from __future__ import annotations

import math
import warnings
import weakref
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Literal

from haarlab.functions.stepfn import DyadicStepFunction, distribution, lp_norm
from haarlab.grid.dyadic import DyadicInterval, descendants_at, neighbors_within
from haarlab.operators.shift import apply, dyadic_hilbert

if TYPE_CHECKING:
    from collections.abc import Callable

    from haarlab.grid.measure import MeasureTree
    from haarlab.sparse.family import SparseFamily

    OperatorTag = Literal["maximal", "maximal_n", "hilbert"]

# (value, averaging interval I, evaluation interval J)
Candidate = tuple[float, "DyadicInterval | None", "DyadicInterval | None"]
_NONE: Candidate = (0.0, None, None)

_factor_cache: weakref.WeakKeyDictionary[MeasureTree, dict] = (
    weakref.WeakKeyDictionary()
)


@dataclass
class MaximalResult:
    """ℳ^N f together with the pair (I, J) attaining the sup on each piece.

    clipped is True when the depth bound removed neighbors or subdivisions that
    exist in the unbounded grid.
    """

    value: DyadicStepFunction
    attaining_pairs: dict[DyadicInterval, tuple[DyadicInterval, DyadicInterval]] = (
        field(default_factory=dict)
    )
    clipped: bool = False


def _better(first: Candidate, second: Candidate) -> Candidate:
    return second if second[0] > first[0] else first


def maximal(tree: MeasureTree, func: DyadicStepFunction) -> DyadicStepFunction:
    """ℳf(x) = sup over dyadic I ∋ x of ⟨|f|⟩_I.

    On a cell Q of |f| this is the max of |f|(Q) and the averages over the
    strict ancestors of Q, so the result is exact and constant on cells.
    """
    magnitude = abs(func)
    table = magnitude.integrals(tree)
    running: dict[DyadicInterval, object] = {}
    for node in sorted(table.nodes()):
        avg = table.average(node)
        if not node.is_root:
            avg = max(avg, running[node.parent])
        running[node] = avg
    return DyadicStepFunction({cell: running[cell] for cell in magnitude.cells})


def maximal_weighted(
    tree: MeasureTree, weight: DyadicStepFunction, func: DyadicStepFunction
) -> DyadicStepFunction:
    """ℳ^w f(x) = sup over I ∋ x of w(I)^{-1} ∫_I |f| w dμ."""
    magnitude = abs(func)
    weighted = magnitude * weight
    top, bottom = weighted.integrals(tree), weight.integrals(tree)
    cells = magnitude._combine(weight, lambda a, b: (a, b)).cells
    nodes: set[DyadicInterval] = set()
    for cell in cells:
        node = cell
        while node not in nodes:
            nodes.add(node)
            if node.is_root:
                break
            node = node.parent
    running: dict[DyadicInterval, object] = {}
    for node in sorted(nodes):
        avg = top.integral(node) / bottom.integral(node)
        if not node.is_root:
            avg = max(avg, running[node.parent])
        running[node] = avg
    return DyadicStepFunction({cell: running[cell] for cell in cells})


def c_one(tree: MeasureTree, first: DyadicInterval, second: DyadicInterval) -> float:
    """c_1^b(I, J) = √(m(I) m(J)) / μ(J) for I ≠ J, and 1 on the diagonal."""
    if first == second:
        return 1.0
    m_first, m_second = float(tree.m_value(first)), float(tree.m_value(second))
    return math.sqrt(m_first * m_second) / float(tree.mass(second))


def _factor(tree: MeasureTree, interval: DyadicInterval, radius: int) -> Candidate:
    """max of c_1^b(I, J) over internal I ≠ J with dist(I, J) <= radius, cached."""
    cache = _factor_cache.setdefault(tree, {})
    key = ("factor", interval, radius)
    if key not in cache:
        best = _NONE
        hood = neighbors_within(interval, radius, tree.depth_bound - 1)
        for other, dist in hood:
            if dist > 0:
                best = _better(best, (c_one(tree, other, interval), other, interval))
        cache[key] = best
    return cache[key]


def _uniform_subtree_factor(
    tree: MeasureTree, top: DyadicInterval, radius: int
) -> Candidate:
    """Subtree factor of an interval below which the measure splits equally.

    From relative depth radius on, every neighborhood lies in the equal-split
    region, where c_1^b(I, J) = 2^{(level(J) - level(I)) / 2} / 4 peaks at
    2^{radius / 2} / 4. Shallower intervals are scanned.
    """
    bound = tree.depth_bound
    best = _NONE
    for depth in range(radius):
        if top.level + depth >= bound:
            return best
        for interval in descendants_at(top, depth):
            best = _better(best, _factor(tree, interval, radius))
    if top.level + radius < bound:
        deep = descendants_at(top, radius)[0]
        best = _better(best, (2 ** (radius / 2) / 4, top, deep))
    return best


def _subtree_factor(tree: MeasureTree, top: DyadicInterval, radius: int) -> Candidate:
    """max over internal J ⊆ top of the neighborhood factor of J, cached per tree."""
    cache = _factor_cache.setdefault(tree, {})
    stack = [(top, False)]
    while stack:
        node, expanded = stack.pop()
        key = ("subtree", node, radius)
        if key in cache:
            continue
        if node.level >= tree.depth_bound:
            cache[key] = _NONE
        elif tree.is_uniform_below(node):
            cache[key] = _uniform_subtree_factor(tree, node, radius)
        elif not expanded:
            stack.append((node, True))
            stack.extend((child, False) for child in node.children)
        else:
            best = _factor(tree, node, radius)
            for child in node.children:
                best = _better(best, cache[("subtree", child, radius)])
            cache[key] = best
    return cache[("subtree", top, radius)]


def maximal_N(
    tree: MeasureTree, func: DyadicStepFunction, N: int, *, warn: bool = True
) -> MaximalResult:
    """ℳ^N f(x) = sup of c_1^b(I, J) ⟨|f|⟩_I over x ∈ J, dist(I, J) <= N + 2.

    Every cell Q of |f| is subdivided down to relative depth N + 2. For J ⊇ Q
    or J between Q and a piece the neighborhoods are scanned directly. For
    deeper J every neighbor lies inside Q, where ⟨|f|⟩ is the cell value, so
    their contribution is the cell value times a subtree factor of the measure.

    Args:
        tree (MeasureTree): the measure
        func (DyadicStepFunction): the function
        N (int): the complexity
        warn (bool): emit a warning when the depth bound clips the evaluation.
            Default = True

    Returns:
        MaximalResult: value, attaining pairs and the clipping flag

    Raises:
        ValueError: if N < 0
    """
    if N < 0:
        raise ValueError(f"{N=} must be nonnegative")
    radius = N + 2
    bound = tree.depth_bound
    magnitude = abs(func)
    table = magnitude.integrals(tree)
    clipped = False
    local_cache: dict[DyadicInterval, Candidate] = {}

    def local(interval: DyadicInterval) -> Candidate:
        """Best off-diagonal c_1^b(I, J) ⟨|f|⟩_I at J = interval."""
        nonlocal clipped
        if interval in local_cache:
            return local_cache[interval]
        best = _NONE
        if interval.level < bound:
            hood = neighbors_within(interval, radius, bound - 1)
            clipped |= hood.clipped
            for other, dist in hood:
                if dist == 0:
                    continue
                avg = float(table.average(other))
                if avg > 0:
                    value = c_one(tree, other, interval) * avg
                    best = _better(best, (value, other, interval))
        local_cache[interval] = best
        return best

    running: dict[DyadicInterval, Candidate] = {}
    for node in sorted(table.nodes()):
        best = (float(table.average(node)), node, node)
        if not node.is_root:
            best = _better(running[node.parent], best)
        running[node] = _better(best, local(node))

    values: dict[DyadicInterval, float] = {}
    pairs: dict[DyadicInterval, tuple[DyadicInterval, DyadicInterval]] = {}
    for cell, cell_value in magnitude:
        depth = min(radius, bound - cell.level)
        clipped |= depth < radius
        uniform = tree.is_uniform_below(cell)
        stack = [(cell, running[cell])]
        while stack:
            node, best = stack.pop()
            if node.level - cell.level < depth:
                for child in node.children:
                    stack.append((child, _better(best, local(child))))
                continue
            if cell_value != 0:
                if node.level + 1 >= bound:
                    clipped = True
                elif uniform:
                    deep = descendants_at(node, 1)[0]
                    factor = 2 ** (radius / 2) / 4
                    top = deep.ancestor(radius)
                    candidate = (factor * float(cell_value), top, deep)
                    best = _better(best, candidate)
                else:
                    for child in node.children:
                        factor, other, interval = _subtree_factor(tree, child, radius)
                        candidate = (factor * float(cell_value), other, interval)
                        best = _better(best, candidate)
            values[node] = best[0]
            if best[1] is not None:
                pairs[node] = (best[1], best[2])
    if clipped and warn:
        warnings.warn(
            f"maximal_N({N=}) clipped at depth_bound={bound}, increase the depth",
            stacklevel=2,
        )
    return MaximalResult(DyadicStepFunction(values), pairs, clipped)


def _resolve_operator(
    op: OperatorTag | Callable[[MeasureTree, DyadicStepFunction], DyadicStepFunction],
    levels: int,
) -> Callable[[MeasureTree, DyadicStepFunction], DyadicStepFunction]:
    if callable(op):
        return op
    if op == "maximal":
        return maximal
    if op == "maximal_n":
        return lambda tree, func: maximal_N(tree, func, levels, warn=False).value
    if op == "hilbert":
        hilbert = dyadic_hilbert()
        return lambda tree, func: apply(hilbert, tree, func)
    raise ValueError(f"unknown operator {op=}, expected maximal, maximal_n or hilbert")


def weak11_ratio(
    tree: MeasureTree,
    op: OperatorTag | Callable[[MeasureTree, DyadicStepFunction], DyadicStepFunction],
    func: DyadicStepFunction,
    levels: int = 1,
    weight: DyadicStepFunction | None = None,
) -> float:
    """sup_λ λ w{|T f| > λ} / ‖f‖_{L¹(w)}, exact over the level sets of T f.

    Args:
        tree (MeasureTree): the measure
        op: "maximal", "maximal_n" (ℳ^levels), "hilbert" or a callable (tree, f) -> T f
        func (DyadicStepFunction): the input, not identically zero
        levels (int): N for "maximal_n". Default = 1
        weight (DyadicStepFunction | None): measure w dμ instead of μ. Default = None

    Raises:
        ValueError: if f vanishes or op is unknown
    """
    operator = _resolve_operator(op, levels)
    norm = lp_norm(tree, func, 1, weight)
    if norm == 0:
        raise ValueError("weak11_ratio needs a nonzero input")
    image = operator(tree, func)
    best = 0.0
    for level, level_mass in distribution(tree, image, weight):
        best = max(best, float(level * level_mass / norm))
    return best


def level_set_collection(
    tree: MeasureTree,
    func: DyadicStepFunction,
    N: int,
    result: MaximalResult | None = None,
) -> SparseFamily:
    """Sparse collection built from the bands {2^n < ℳ^N f <= 2^{n+1}}.

    The members are the maximal dyadic intervals of every band together with
    the pairs (I, J) attaining ℳ^N f on them. Intervals at the depth bound are
    left out since m is undefined there.
    """
    from haarlab.sparse.family import SparseFamily

    result = result or maximal_N(tree, func, N, warn=False)
    bands: dict[DyadicInterval, int] = {}
    for piece, value in result.value:
        if value > 0:
            bands[piece] = math.ceil(math.log2(value)) - 1
    members: set[DyadicInterval] = set()
    for band in set(bands.values()):
        marker = DyadicStepFunction.from_pieces(
            {piece: 1 for piece, level in bands.items() if level == band}
        )
        members.update(cell for cell, val in marker if val == 1)
        for piece, level in bands.items():
            if level == band and piece in result.attaining_pairs:
                members.update(result.attaining_pairs[piece])
    members = {member for member in members if member.level < tree.depth_bound}
    return SparseFamily.build(tree, members)
