from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from haarlab.functions.stepfn import DyadicStepFunction
from haarlab.grid.dyadic import ROOT, DyadicInterval

if TYPE_CHECKING:
    from collections.abc import Mapping

    from typing_extensions import Self

    from haarlab import Number
    from haarlab.grid.measure import MeasureTree


@dataclass
class HaarCoefficients:
    """Sparse Haar expansion f = ⟨f⟩_root + Σ_I ⟨f, h_I⟩ h_I.

    Coefficients are stored through the differences d_I = ⟨f⟩_{I_-} - ⟨f⟩_{I_+},
    so that ⟨f, h_I⟩ = √m(I) d_I. The square root never enters synthesis or
    the Parseval sum, which therefore stay exact for rational data.
    """

    root_mean: Number
    root_mass: Number
    differences: dict[DyadicInterval, Number] = field(default_factory=dict)
    m_values: dict[DyadicInterval, Number] = field(default_factory=dict)

    @classmethod
    def from_coefficients(
        cls,
        tree: MeasureTree,
        coeffs: Mapping[DyadicInterval, float],
        root_mean: Number = 0,
    ) -> Self:
        """Build an expansion from the values ⟨f, h_I⟩ directly."""
        differences, m_values = {}, {}
        for interval, coeff in coeffs.items():
            if coeff == 0:
                continue
            m = tree.m_value(interval)
            differences[interval] = coeff / math.sqrt(m)
            m_values[interval] = m
        return cls(root_mean, tree.mass(ROOT), differences, m_values)

    def coefficient(self, interval: DyadicInterval) -> float:
        """⟨f, h_I⟩, zero off the support."""
        if interval not in self.differences:
            return 0.0
        return math.sqrt(self.m_values[interval]) * self.differences[interval]

    @property
    def coeffs(self) -> dict[DyadicInterval, float]:
        """interval -> ⟨f, h_I⟩ on the support."""
        return {interval: self.coefficient(interval) for interval in self.support()}

    def squared(self, interval: DyadicInterval) -> Number:
        """⟨f, h_I⟩², exact for rational data."""
        diff = self.differences.get(interval, 0)
        return self.m_values.get(interval, 0) * diff * diff

    def support(self) -> list[DyadicInterval]:
        """Intervals with a nonzero coefficient, in (level, index) order."""
        return sorted(self.differences)

    def energy(self) -> Number:
        """root_mean² μ(root) + Σ ⟨f, h_I⟩², which equals ‖f‖₂² by Parseval."""
        total = self.root_mean * self.root_mean * self.root_mass
        for interval in self.differences:
            total += self.squared(interval)
        return total


def haar_function(tree: MeasureTree, interval: DyadicInterval) -> DyadicStepFunction:
    """h_I = √m(I) (1_{I_-} / μ(I_-) - 1_{I_+} / μ(I_+)).

    Raises:
        ValueError: if interval is at the depth bound
    """
    root_m = math.sqrt(tree.m_value(interval))
    left, right = interval.children
    return DyadicStepFunction.from_pieces(
        {left: root_m / tree.mass(left), right: -root_m / tree.mass(right)}
    )


def haar_coefficient(
    tree: MeasureTree, func: DyadicStepFunction, interval: DyadicInterval
) -> float:
    """⟨f, h_I⟩ = √m(I) (⟨f⟩_{I_-} - ⟨f⟩_{I_+})."""
    table = func.integrals(tree)
    left, right = interval.children
    diff = table.average(left) - table.average(right)
    return math.sqrt(tree.m_value(interval)) * diff


def analyze(tree: MeasureTree, func: DyadicStepFunction) -> HaarCoefficients:
    """Haar coefficients of f. Only strict ancestors of cells can carry one."""
    table = func.integrals(tree)
    differences, m_values = {}, {}
    for node in table.internal_nodes():
        left, right = node.children
        diff = table.average(left) - table.average(right)
        if diff != 0:
            differences[node] = diff
            m_values[node] = tree.m_value(node)
    return HaarCoefficients(
        table.average(ROOT), tree.mass(ROOT), differences, m_values
    )


def synthesize(tree: MeasureTree, coeffs: HaarCoefficients) -> DyadicStepFunction:
    """Rebuild the step function from its Haar expansion.

    Walks the support top-down: on a node with average a, the children averages
    are a + d m / μ(I_-) and a - d m / μ(I_+).
    """
    nodes: set[DyadicInterval] = set()
    for interval in coeffs.differences:
        node = interval
        while node not in nodes:
            nodes.add(node)
            if node.is_root:
                break
            node = node.parent
    values: dict[DyadicInterval, Number] = {ROOT: coeffs.root_mean}
    for node in sorted(nodes):
        avg = values.pop(node)
        diff = coeffs.differences.get(node, 0)
        left, right = node.children
        if diff == 0:
            values[left] = values[right] = avg
            continue
        m = coeffs.m_values.get(node)
        if m is None:
            m = tree.m_value(node)
        values[left] = avg + diff * m / tree.mass(left)
        values[right] = avg - diff * m / tree.mass(right)
    return DyadicStepFunction(values)
