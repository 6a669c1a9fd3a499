from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Literal

from haarlab.functions.stepfn import Weight, conjugate_exponent
from haarlab.grid.dyadic import DyadicInterval, descendants_at, neighbors_within
from haarlab.grid.measure import ChainSplit

if TYPE_CHECKING:
    from collections.abc import Callable, Iterable

    from haarlab.functions.stepfn import DyadicStepFunction
    from haarlab.grid.measure import MeasureTree

WeightKind = Literal["classical", "balanced", "distance-N", "one-sided-01"]
Pair = tuple[DyadicInterval, DyadicInterval]


@dataclass
class WeightCharacteristic:
    """A weight characteristic scanned down to a finite depth.

    value is nondecreasing in scan_depth, so unboundedness shows up as growth
    across depths. off_diagonal is the sup restricted to pairs I ≠ J.
    """

    value: float
    p: float
    kind: WeightKind
    scan_depth: int
    attaining_pair: Pair
    off_diagonal: float = 0.0
    off_diagonal_pair: Pair | None = None
    N: int | None = None

    def to_dict(self) -> dict[str, Any]:
        """Serialize the characteristic."""
        out = {
            "value": self.value,
            "p": self.p,
            "kind": self.kind,
            "scan_depth": self.scan_depth,
            "attaining_pair": [str(interval) for interval in self.attaining_pair],
            "off_diagonal": self.off_diagonal,
        }
        if self.N is not None:
            out["N"] = self.N
        return out


def c_p_b(
    tree: MeasureTree, first: DyadicInterval, second: DyadicInterval, p: float
) -> float:
    """c_p^b(I, J) = m(I)^{p/2} m(J)^{p/2} / (μ(J) μ(I)^{p-1}), and 1 for I = J.

    Raises:
        ValueError: if p < 1 or an off-diagonal interval is at the depth bound
    """
    if p < 1:
        raise ValueError(f"{p=} must be at least 1")
    if first == second:
        return 1.0
    m_first, m_second = float(tree.m_value(first)), float(tree.m_value(second))
    mu_first, mu_second = float(tree.mass(first)), float(tree.mass(second))
    return (m_first * m_second) ** (p / 2) / (mu_second * mu_first ** (p - 1))


def _dual_exponent(p: float) -> float | int:
    exponent = 1 - conjugate_exponent(p)
    return int(exponent) if float(exponent).is_integer() else exponent


class PairScanner:
    """Evaluates c_p^b(I, J) ⟨w⟩_I ⟨w^{1-p'}⟩_J^{p-1} over a finite scan set.

    For p = 1 the right factor is 1 / min_J w. Where w is constant and the
    measure splits equally the pair values only depend on the relative
    position of I and J, so one such region stands in for all of them, and
    the scan set is
        nodes where w is not constant or the measure is not equal-split,
        their descendants within reach levels,
        one equal-split constant region down to reach levels.
    """

    def __init__(
        self, tree: MeasureTree, weight: DyadicStepFunction, p: float, depth: int
    ) -> None:
        """Prepare the averages of w and its dual weight.

        Raises:
            ValueError: if p < 1 or depth < 0
        """
        if p < 1:
            raise ValueError(f"{p=} must be at least 1")
        if depth < 0:
            raise ValueError(f"{depth=} must be nonnegative")
        self.tree = tree
        self.weight = weight
        self.p = p
        self.depth = min(depth, tree.depth_bound - 1)
        self.w_table = weight.integrals(tree)
        self.sigma = None if p == 1 else weight ** _dual_exponent(p)
        self._left: dict[DyadicInterval, float] = {}
        self._right: dict[DyadicInterval, float] = {}

    def left(self, interval: DyadicInterval) -> float:
        """⟨w⟩_I."""
        if interval not in self._left:
            self._left[interval] = float(self.w_table.average(interval))
        return self._left[interval]

    def right(self, interval: DyadicInterval) -> float:
        """⟨w^{1-p'}⟩_J^{p-1}, or 1 / min_J w for p = 1."""
        if interval not in self._right:
            if self.sigma is None:
                low = min(val for _, val in self.weight.pieces_over(interval))
                self._right[interval] = 1 / float(low)
            else:
                avg = float(self.sigma.integrals(self.tree).average(interval))
                self._right[interval] = avg ** (self.p - 1)
        return self._right[interval]

    def value(self, first: DyadicInterval, second: DyadicInterval) -> float | None:
        """The pair value, None when the pair lies outside the scan."""
        if first.level > self.depth or second.level > self.depth:
            return None
        factor = c_p_b(self.tree, first, second, self.p)
        return factor * self.left(first) * self.right(second)

    def scan_set(self, reach: int) -> set[DyadicInterval]:
        """Intervals from which every relevant pair is reached within reach levels."""
        tree, depth = self.tree, self.depth
        nodes = {node for node in self.w_table.nodes() if node.level <= depth}
        seeds = {node for node in self.w_table.internal_nodes() if node.level <= depth}
        tops = []
        frontier = []
        for cell in self.weight.cells:
            if cell.level > depth:
                continue
            if tree.is_uniform_below(cell):
                tops.append(cell)
            else:
                frontier.append(cell)
        while frontier:
            node = frontier.pop()
            seeds.add(node)
            if node.level >= depth:
                continue
            for child in node.children:
                if tree.is_uniform_below(child):
                    tops.append(child)
                else:
                    frontier.append(child)
        scan = nodes | seeds
        if tops:
            seeds.add(min(tops))
        for seed in seeds:
            for offset in range(1, reach + 1):
                if seed.level + offset > depth:
                    break
                scan.update(descendants_at(seed, offset))
        return scan

    def scan(
        self,
        pairs: Callable[[DyadicInterval], Iterable[Pair]],
        reach: int,
        kind: WeightKind,
        N: int | None = None,
    ) -> WeightCharacteristic:
        """Max of the pair values over pairs(A) for A in the scan set."""
        best, best_pair = 0.0, (DyadicInterval(0, 0),) * 2
        off, off_pair = 0.0, None
        for anchor in sorted(self.scan_set(reach)):
            for first, second in pairs(anchor):
                value = self.value(first, second)
                if value is None:
                    continue
                if value > best:
                    best, best_pair = value, (first, second)
                if first != second and value > off:
                    off, off_pair = value, (first, second)
        return WeightCharacteristic(
            value=best,
            p=self.p,
            kind=kind,
            scan_depth=self.depth,
            attaining_pair=best_pair,
            off_diagonal=off,
            off_diagonal_pair=off_pair,
            N=N,
        )


def _nephews(interval: DyadicInterval) -> tuple[DyadicInterval, ...]:
    return () if interval.is_root else interval.sibling.children


def _uncle(interval: DyadicInterval) -> DyadicInterval | None:
    return interval.parent.sibling if interval.level >= 2 else None


def _balanced_pairs(anchor: DyadicInterval) -> list[Pair]:
    """J = I, J a child of the sibling of I, or I a child of the sibling of J."""
    pairs = [(anchor, anchor)]
    for nephew in _nephews(anchor):
        pairs.extend([(anchor, nephew), (nephew, anchor)])
    if (uncle := _uncle(anchor)) is not None:
        pairs.extend([(anchor, uncle), (uncle, anchor)])
    return pairs


def _one_sided_pairs(anchor: DyadicInterval) -> list[Pair]:
    """(K, J) with K = J or K a child of the sibling of J."""
    pairs = [(anchor, anchor)]
    pairs.extend((nephew, anchor) for nephew in _nephews(anchor))
    if (uncle := _uncle(anchor)) is not None:
        pairs.append((anchor, uncle))
    return pairs


def char_Ap(
    tree: MeasureTree, weight: DyadicStepFunction, p: float, depth: int
) -> WeightCharacteristic:
    """[w]_{A_p(μ)} = sup over I with level <= depth of ⟨w⟩_I ⟨w^{1-p'}⟩_I^{p-1}.

    Intervals inside a cell of w contribute 1, up to rounding.

    Raises:
        ValueError: if p <= 1
    """
    if p <= 1:
        raise ValueError(f"classical characteristic needs {p=} > 1")
    scanner = PairScanner(tree, weight, p, depth)
    best, best_pair = 0.0, (DyadicInterval(0, 0),) * 2
    for cell in weight.cells:
        if cell.level <= scanner.depth:
            best, best_pair = scanner.value(cell, cell), (cell, cell)
            break
    for node in sorted(scanner.w_table.internal_nodes()):
        value = scanner.value(node, node)
        if value is not None and value > best:
            best, best_pair = value, (node, node)
    return WeightCharacteristic(best, p, "classical", scanner.depth, best_pair)


def char_Ap_b(
    tree: MeasureTree, weight: DyadicStepFunction, p: float, depth: int
) -> WeightCharacteristic:
    """[w]_{A_p^b(μ)}: the sup over the diagonal and the uncle/nephew pairs."""
    scanner = PairScanner(tree, weight, p, depth)
    return scanner.scan(_balanced_pairs, reach=2, kind="balanced")


def char_Ap_N(
    tree: MeasureTree, weight: DyadicStepFunction, p: float, N: int, depth: int
) -> WeightCharacteristic:
    """[w]_{A_p^N(μ)}: the sup over all pairs with dist(I, J) <= N + 2.

    Raises:
        ValueError: if N < 0
    """
    if N < 0:
        raise ValueError(f"{N=} must be nonnegative")
    scanner = PairScanner(tree, weight, p, depth)
    radius = N + 2

    def pairs(anchor: DyadicInterval) -> list[Pair]:
        out = []
        for other, _dist in neighbors_within(anchor, radius, scanner.depth):
            out.append((anchor, other))
            if other != anchor:
                out.append((other, anchor))
        return out

    return scanner.scan(pairs, reach=radius, kind="distance-N", N=N)


def char_one_sided_01(
    tree: MeasureTree, weight: DyadicStepFunction, depth: int
) -> WeightCharacteristic:
    """[w]_{A_2^{0,1}(μ)}: sup of c_2^b(K, J) ⟨w⟩_K ⟨w^{-1}⟩_J.

    K runs over J and the two children of the sibling J^b.
    """
    scanner = PairScanner(tree, weight, 2, depth)
    return scanner.scan(_one_sided_pairs, reach=2, kind="one-sided-01")


def build_badweight(tree: MeasureTree, kmax: int) -> Weight:
    """w = 2^{-k/2} on I_{2^k}^b for 1 <= k <= kmax, and 1 elsewhere.

    Raises:
        ValueError: if tree is not the chain measure or is too shallow
    """
    if not isinstance(tree.rule, ChainSplit):
        raise ValueError(f"the bad weight lives on the lmp measure, got {tree.kind=}")
    if kmax < 1:
        raise ValueError(f"{kmax=} must be at least 1")
    if tree.depth_bound < 2**kmax + 1:
        raise ValueError(
            f"depth_bound={tree.depth_bound} must be at least "
            f"2^{kmax} + 1 = {2**kmax + 1}"
        )
    pieces = {DyadicInterval(2**k, 1): 2.0 ** (-k / 2) for k in range(1, kmax + 1)}
    return Weight.from_pieces(pieces, fill=1.0)
