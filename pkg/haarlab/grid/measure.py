from __future__ import annotations

import threading
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Any

import numpy as np

from haarlab.grid.dyadic import ROOT, DyadicInterval
from haarlab.utils.common_utils import determine_mode, read_json
from haarlab.utils.literals import format_fraction, parse_fraction

if TYPE_CHECKING:
    from haarlab import ArithmeticMode, MeasureKind, Number

HALF = Fraction(1, 2)


class SplitRule:
    """Deterministic refinement rule: the share of μ(I) that goes to I_-."""

    kind: MeasureKind = "uniform"

    def left_fraction(self, interval: DyadicInterval) -> Fraction:
        """Fraction of the mass of interval carried by its left child."""
        return HALF

    def uniform_below(self, interval: DyadicInterval) -> bool:
        """Whether every split at or below interval is an equal split."""
        return True

    def params(self) -> dict[str, Any]:
        """Parameters needed to rebuild the rule from a spec file."""
        return {}


class ChainSplit(SplitRule):
    """The balanced, nondoubling chain measure on I_k = (k, 0).

    μ(I_1) = μ(I_1^b) = 1/2, μ(I_k) = (1 - 1/k) μ(I_{k-1}) and
    μ(I_k^b) = μ(I_{k-1}) / k, with equal splits strictly inside every I_k^b.
    """

    kind: MeasureKind = "lmp"

    def left_fraction(self, interval: DyadicInterval) -> Fraction:
        if interval.index != 0 or interval.level == 0:
            return HALF
        k = interval.level + 1
        return Fraction(k - 1, k)

    def uniform_below(self, interval: DyadicInterval) -> bool:
        return interval.index != 0


class RandomSplit(SplitRule):
    """Split fractions drawn uniformly from [theta, 1 - theta], one seed per node.

    Each node draws from its own generator seeded by (seed, level, index), so the
    masses do not depend on the order in which nodes are materialized.
    """

    kind: MeasureKind = "random"

    def __init__(self, seed: int, theta: float) -> None:
        """Initialize the rule.

        Raises:
            ValueError: if theta is outside (0, 1/2]
        """
        if not 0 < theta <= 0.5:
            raise ValueError(f"{theta=} must lie in (0, 1/2]")
        self.seed = seed
        self.theta = theta

    def left_fraction(self, interval: DyadicInterval) -> Fraction:
        if self.theta == 0.5:
            return HALF
        rng = np.random.default_rng([self.seed, interval.level, interval.index])
        return Fraction(float(rng.uniform(self.theta, 1 - self.theta)))

    def uniform_below(self, interval: DyadicInterval) -> bool:
        return self.theta == 0.5

    def params(self) -> dict[str, Any]:
        return {"seed": self.seed, "theta": self.theta}


class ExplicitSplit(SplitRule):
    """Masses pinned on a parent-closed set of intervals, equal splits elsewhere."""

    kind: MeasureKind = "explicit"

    def __init__(self, masses: dict[DyadicInterval, Fraction]) -> None:
        """Validate and store the explicit masses.

        Raises:
            ValueError: on non-positive masses, a set not closed under parent,
                or children that do not add up to their parent
        """
        if ROOT not in masses:
            raise ValueError("explicit masses must include the root")
        for interval, value in masses.items():
            if value <= 0:
                raise ValueError(f"mass of {interval} must be positive, got {value}")
            if not interval.is_root and interval.parent not in masses:
                raise ValueError(
                    f"explicit set is not closed under parent at {interval}"
                )
        for interval, value in masses.items():
            left, right = interval.children
            if left in masses and right in masses:
                if masses[left] + masses[right] != value:
                    raise ValueError(f"children of {interval} do not add up to {value}")
            elif left in masses and masses[left] >= value:
                raise ValueError(f"left child of {interval} exhausts its mass")
            elif right in masses and masses[right] >= value:
                raise ValueError(f"right child of {interval} exhausts its mass")
        self.masses = dict(masses)
        self._has_explicit_below = {
            ancestor for interval in masses for ancestor in interval.ancestors()
        }

    def left_fraction(self, interval: DyadicInterval) -> Fraction:
        left, right = interval.children
        if left in self.masses:
            return self.masses[left] / self.masses[interval]
        if right in self.masses:
            return 1 - self.masses[right] / self.masses[interval]
        return HALF

    def uniform_below(self, interval: DyadicInterval) -> bool:
        return interval not in self._has_explicit_below

    def params(self) -> dict[str, Any]:
        return {
            "explicit": [
                {"interval": str(interval), "mass": format_fraction(mass)}
                for interval, mass in sorted(self.masses.items())
            ]
        }


class MeasureTree:
    """Lazily refinable atomless measure on the rooted dyadic grid.

    Masses are materialized on demand from a deterministic split rule and
    memoized. Materialization is guarded by a lock, and because the rule is
    deterministic, refining the same node twice always yields identical masses.
    """

    def __init__(
        self,
        rule: SplitRule | None = None,
        *,
        depth_bound: int,
        mode: ArithmeticMode | None = None,
        root_mass: Number = 1,
    ) -> None:
        """Initialize a measure tree.

        Args:
            rule (SplitRule): refinement rule. Default = None (equal splits)
            depth_bound (int): deepest level that may ever be materialized
            mode (ArithmeticMode): "float" or "rational".
                Default = None (resolved by determine_mode)
            root_mass (Number): μ(root). Default = 1

        Raises:
            ValueError: if depth_bound < 1 or root_mass <= 0
        """
        if depth_bound < 1:
            raise ValueError(f"{depth_bound=} must be at least 1")
        if root_mass <= 0:
            raise ValueError(f"{root_mass=} must be positive")
        self.rule = rule or SplitRule()
        self.depth_bound = depth_bound
        self.mode = determine_mode(mode)
        self._lock = threading.Lock()
        self._masses: dict[DyadicInterval, Number] = {ROOT: self.number(root_mass)}
        self.balance: BalanceReport | None = None

    def __repr__(self) -> str:
        """String representation of the measure."""
        kind, depth_bound, mode = self.kind, self.depth_bound, self.mode
        n_materialized = len(self._masses)
        return f"MeasureTree({kind=}, {depth_bound=}, {mode=}, {n_materialized=})"

    @property
    def kind(self) -> MeasureKind:
        """The kind of the refinement rule."""
        return self.rule.kind

    def number(self, value: Number) -> Number:
        """Coerce a value to the arithmetic of this tree."""
        if self.mode == "rational":
            return Fraction(value)
        return float(value)

    def check_level(self, interval: DyadicInterval, *, internal: bool = False) -> None:
        """Raise ValueError when interval lies beyond the depth bound.

        Args:
            interval (DyadicInterval): the interval to check
            internal (bool): require level < depth_bound so that the children
                exist. Default = False
        """
        limit = self.depth_bound - 1 if internal else self.depth_bound
        if interval.level > limit:
            raise ValueError(
                f"{interval} at level {interval.level} exceeds depth_bound="
                f"{self.depth_bound}{' for an internal interval' if internal else ''}"
            )

    def mass(self, interval: DyadicInterval) -> Number:
        """μ(I), materializing the ancestor chain as needed."""
        masses = self._masses
        if interval in masses:
            return masses[interval]
        self.check_level(interval)
        with self._lock:
            chain = []
            node = interval
            while node not in masses:
                chain.append(node)
                node = node.parent
            for node in reversed(chain):
                if node in masses:
                    continue
                self._split(node.parent)
            return masses[interval]

    def _split(self, interval: DyadicInterval) -> None:
        parent_mass = self._masses[interval]
        fraction = self.rule.left_fraction(interval)
        if self.mode == "rational":
            left_mass = parent_mass * fraction
            right_mass = parent_mass * (1 - fraction)
        else:
            left_mass = parent_mass * float(fraction)
            right_mass = parent_mass * float(1 - fraction)
        left, right = interval.children
        self._masses[left] = left_mass
        self._masses[right] = right_mass

    def m_value(self, interval: DyadicInterval) -> Number:
        """m(I) = μ(I_-) μ(I_+) / μ(I)."""
        self.check_level(interval, internal=True)
        left, right = interval.children
        return self.mass(left) * self.mass(right) / self.mass(interval)

    def is_uniform_below(self, interval: DyadicInterval) -> bool:
        """Whether every split at or strictly below interval is an equal split."""
        return self.rule.uniform_below(interval)

    def materialized(self) -> dict[DyadicInterval, Number]:
        """A snapshot of the memoized masses."""
        with self._lock:
            return dict(self._masses)


def build_uniform(
    depth_bound: int, *, mode: ArithmeticMode | None = None
) -> MeasureTree:
    """Lebesgue measure on [0, 1): μ(I) = 2^-level."""
    return MeasureTree(SplitRule(), depth_bound=depth_bound, mode=mode)


def build_lmp(depth_bound: int, *, mode: ArithmeticMode | None = None) -> MeasureTree:
    """The balanced, nondoubling chain measure.

    μ(I_k) = 1 / (2k) and μ(I_k^b) = 1 / (2k(k - 1)) for k >= 2. Only the left
    chain carries non-equal splits, so the materialized set grows with the
    depth of the queried intervals, never with 2^depth.

    Raises:
        ValueError: if depth_bound < 2
    """
    if depth_bound < 2:
        raise ValueError(f"{depth_bound=} must be at least 2")
    tree = MeasureTree(ChainSplit(), depth_bound=depth_bound, mode=mode)
    tree.mass(DyadicInterval(depth_bound, 0))
    return tree


def build_random_balanced(
    depth_bound: int,
    seed: int,
    theta: float = 0.25,
    *,
    mode: ArithmeticMode | None = None,
    report_depth: int = 8,
) -> MeasureTree:
    """Dyadically doubling random measure with split fractions in [theta, 1 - theta].

    A BalanceReport scanned to min(report_depth, depth_bound - 1) is attached as
    tree.balance.
    """
    tree = MeasureTree(RandomSplit(seed, theta), depth_bound=depth_bound, mode=mode)
    tree.balance = balance_report(tree, min(report_depth, depth_bound - 1))
    return tree


def mass(tree: MeasureTree, interval: DyadicInterval) -> Number:
    """μ(I)."""
    return tree.mass(interval)


def m_value(tree: MeasureTree, interval: DyadicInterval) -> Number:
    """m(I) = μ(I_-) μ(I_+) / μ(I)."""
    return tree.m_value(interval)


def is_uniform_below(tree: MeasureTree, interval: DyadicInterval) -> bool:
    """Whether the measure splits equally everywhere inside interval."""
    return tree.is_uniform_below(interval)


@dataclass
class BalanceReport:
    """Balancedness and doubling diagnostics of a measure up to a scan depth."""

    balanced_constant: float
    worst_interval: DyadicInterval
    doubling_profile: list[tuple[int, Number]] = field(default_factory=list)
    scan_depth: int = 0

    def to_dict(self) -> dict[str, Any]:
        """Serialize the report."""
        return {
            "balanced_constant": self.balanced_constant,
            "worst_interval": str(self.worst_interval),
            "doubling_profile": [
                [lvl, float(ratio)] for lvl, ratio in self.doubling_profile
            ],
            "scan_depth": self.scan_depth,
        }


def balance_report(tree: MeasureTree, depth: int) -> BalanceReport:
    """Scan the balanced constant and the doubling profile down to depth.

    Subtrees where the measure splits equally are closed analytically: below an
    equal split m(I)/m(Î) is exactly 1/2 and μ(Î)/μ(I) is exactly 2.

    Raises:
        ValueError: if depth is not in [1, depth_bound - 1]
    """
    if not 1 <= depth <= tree.depth_bound - 1:
        raise ValueError(f"{depth=} must lie in [1, {tree.depth_bound - 1}]")
    worst_ratio: Number = tree.number(0)
    worst_interval = ROOT.left
    doubling: dict[int, Number] = {}

    def record(interval: DyadicInterval, m_ratio: Number, mu_ratio: Number) -> None:
        nonlocal worst_ratio, worst_interval
        balance = max(m_ratio, 1 / m_ratio)
        if balance > worst_ratio:
            worst_ratio, worst_interval = balance, interval
        level = interval.level
        if level not in doubling or mu_ratio > doubling[level]:
            doubling[level] = mu_ratio

    half, two = tree.number(HALF), tree.number(2)
    frontier = list(ROOT.children)
    while frontier:
        next_frontier = []
        for interval in frontier:
            parent = interval.parent
            mu_ratio = tree.mass(parent) / tree.mass(interval)
            record(interval, tree.m_value(interval) / tree.m_value(parent), mu_ratio)
            if interval.level >= depth:
                continue
            if tree.is_uniform_below(interval):
                # every deeper interval sees m(I)/m(Î) = 1/2 and μ(Î)/μ(I) = 2
                record(interval.left, half, two)
                for level in range(interval.level + 2, depth + 1):
                    doubling[level] = max(doubling.get(level, two), two)
                continue
            next_frontier.extend(interval.children)
        frontier = next_frontier
    return BalanceReport(
        balanced_constant=float(worst_ratio),
        worst_interval=worst_interval,
        doubling_profile=sorted(doubling.items()),
        scan_depth=depth,
    )


def measure_from_spec(
    spec: dict[str, Any], *, mode: ArithmeticMode | None = None
) -> MeasureTree:
    """Build a measure from a spec dict.

    The spec has the form {"kind": "uniform"|"lmp"|"random", "depth": int,
    "seed": int?, "theta": real?, "explicit": [{"interval": "L:IDX",
    "mass": "num/den"}]?}. Explicit masses override the kind's rule and must
    add up across children.

    Raises:
        ValueError: on an unknown kind or invalid explicit masses
    """
    known = {"kind", "depth", "seed", "theta", "explicit", "mode"}
    if unknown := set(spec) - known:
        warnings.warn(
            f"ignoring unknown measure spec keys {sorted(unknown)}", stacklevel=2
        )
    kind = spec.get("kind", "uniform")
    depth = int(spec["depth"])
    mode = mode or spec.get("mode")
    if spec.get("explicit"):
        masses = {
            DyadicInterval.from_str(entry["interval"]): parse_fraction(entry["mass"])
            for entry in spec["explicit"]
        }
        masses.setdefault(ROOT, Fraction(1))
        root_mass = masses[ROOT]
        return MeasureTree(
            ExplicitSplit(masses), depth_bound=depth, mode=mode, root_mass=root_mass
        )
    if kind == "uniform":
        return build_uniform(depth, mode=mode)
    if kind == "lmp":
        return build_lmp(depth, mode=mode)
    if kind == "random":
        return build_random_balanced(
            depth, int(spec.get("seed", 0)), float(spec.get("theta", 0.25)), mode=mode
        )
    raise ValueError(f"unknown measure {kind=}, expected uniform, lmp or random")


def load_measure(path: str, *, mode: ArithmeticMode | None = None) -> MeasureTree:
    """Read a measure spec JSON file."""
    return measure_from_spec(read_json(path), mode=mode)


def measure_to_spec(tree: MeasureTree) -> dict[str, Any]:
    """The spec dict that rebuilds tree."""
    return {
        "kind": tree.kind,
        "depth": tree.depth_bound,
        "mode": tree.mode,
        **tree.rule.params(),
    }
