from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

from haarlab.utils.literals import parse_interval

if TYPE_CHECKING:
    from collections.abc import Iterator

    from typing_extensions import Self


@dataclass(frozen=True, order=True)
class DyadicInterval:
    """A node of the rooted dyadic tree on [0, 1).

    (level, index) denotes [index * 2^-level, (index + 1) * 2^-level). The root
    [0, 1) has level 0. Ordering is lexicographic in (level, index).
    """

    level: int
    index: int

    def __post_init__(self) -> None:
        """Validate the level and index.

        Raises:
            ValueError: if level < 0 or index is outside [0, 2^level)
        """
        if self.level < 0:
            raise ValueError(f"{self.level=} must be nonnegative")
        if not 0 <= self.index < (1 << self.level):
            raise ValueError(f"{self.index=} must lie in [0, 2^{self.level})")

    @classmethod
    def root(cls) -> Self:
        """The root interval [0, 1)."""
        return cls(0, 0)

    @classmethod
    def from_str(cls, text: str) -> Self:
        """Parse "L:IDX", "root", "Ik" or "Ikb"."""
        interval = parse_interval(text)
        return cls(interval.level, interval.index)

    def __str__(self) -> str:
        """The "L:IDX" literal."""
        return f"{self.level}:{self.index}"

    @property
    def is_root(self) -> bool:
        """Whether this is the root interval."""
        return self.level == 0

    @property
    def parent(self) -> DyadicInterval:
        """The dyadic parent Î.

        Raises:
            ValueError: for the root
        """
        if self.level == 0:
            raise ValueError("the root interval has no parent")
        return DyadicInterval(self.level - 1, self.index >> 1)

    @property
    def left(self) -> DyadicInterval:
        """The left child I_-."""
        return DyadicInterval(self.level + 1, 2 * self.index)

    @property
    def right(self) -> DyadicInterval:
        """The right child I_+."""
        return DyadicInterval(self.level + 1, 2 * self.index + 1)

    @property
    def children(self) -> tuple[DyadicInterval, DyadicInterval]:
        """(I_-, I_+)."""
        return self.left, self.right

    @property
    def sibling(self) -> DyadicInterval:
        """The other child of the parent, written I^b.

        Raises:
            ValueError: for the root
        """
        if self.level == 0:
            raise ValueError("the root interval has no sibling")
        return DyadicInterval(self.level, self.index ^ 1)

    @property
    def is_left(self) -> bool:
        """Whether this interval is the left child of its parent."""
        return self.level > 0 and self.index % 2 == 0

    def ancestor(self, j: int) -> DyadicInterval:
        """I^{(j)}, the ancestor j generations up. ancestor(0) is self.

        Raises:
            ValueError: if j is negative or exceeds the level
        """
        if not 0 <= j <= self.level:
            raise ValueError(f"ancestor {j=} does not exist for {self}")
        return DyadicInterval(self.level - j, self.index >> j)

    def ancestors(self) -> Iterator[DyadicInterval]:
        """Strict ancestors from the parent up to the root."""
        for j in range(1, self.level + 1):
            yield DyadicInterval(self.level - j, self.index >> j)

    def contains(self, other: DyadicInterval) -> bool:
        """Whether other ⊆ self."""
        shift = other.level - self.level
        return shift >= 0 and other.index >> shift == self.index

    def disjoint(self, other: DyadicInterval) -> bool:
        """Whether the two intervals do not intersect."""
        return not (self.contains(other) or other.contains(self))

    def left_key(self, scale: int) -> int:
        """Left endpoint multiplied by 2^scale, for scale >= level."""
        return self.index << (scale - self.level)

    def right_key(self, scale: int) -> int:
        """Right endpoint multiplied by 2^scale, for scale >= level."""
        return (self.index + 1) << (scale - self.level)


@dataclass(frozen=True)
class GridPosition:
    """The m-th descendant I_s^m of base at depth s."""

    base: DyadicInterval
    s: int
    m: int

    def __post_init__(self) -> None:
        """Validate the depth and position.

        Raises:
            ValueError: if s < 0 or m is outside [0, 2^s)
        """
        if self.s < 0 or not 0 <= self.m < (1 << self.s):
            raise ValueError(f"invalid grid position {self.s=}, {self.m=}")

    @property
    def interval(self) -> DyadicInterval:
        """The interval denoted by this position."""
        base, s = self.base, self.s
        return DyadicInterval(base.level + s, (base.index << s) + self.m)

    @property
    def children(self) -> tuple[GridPosition, GridPosition]:
        """I_{s+1}^{2m} and I_{s+1}^{2m+1}."""
        return (
            GridPosition(self.base, self.s + 1, 2 * self.m),
            GridPosition(self.base, self.s + 1, 2 * self.m + 1),
        )

    @classmethod
    def of(cls, base: DyadicInterval, interval: DyadicInterval) -> Self:
        """Locate a descendant of base as a grid position.

        Raises:
            ValueError: if interval is not inside base
        """
        if not base.contains(interval):
            raise ValueError(f"{interval} is not inside {base}")
        s = interval.level - base.level
        return cls(base, s, interval.index - (base.index << s))


ROOT = DyadicInterval(0, 0)


def parent(interval: DyadicInterval) -> DyadicInterval:
    """Î."""
    return interval.parent


def children(interval: DyadicInterval) -> tuple[DyadicInterval, DyadicInterval]:
    """(I_-, I_+)."""
    return interval.children


def sibling(interval: DyadicInterval) -> DyadicInterval:
    """I^b."""
    return interval.sibling


def ancestor(interval: DyadicInterval, j: int) -> DyadicInterval:
    """I^{(j)}."""
    return interval.ancestor(j)


def lca(first: DyadicInterval, second: DyadicInterval) -> DyadicInterval:
    """The smallest dyadic interval containing both arguments."""
    level = min(first.level, second.level)
    a = first.index >> (first.level - level)
    b = second.index >> (second.level - level)
    while a != b:
        a >>= 1
        b >>= 1
        level -= 1
    return DyadicInterval(level, a)


def dyadic_distance(first: DyadicInterval, second: DyadicInterval) -> int:
    """Min of s + t over common ancestors I^{(s)} = J^{(t)}.

    In the rooted grid this is level(I) + level(J) - 2 level(lca(I, J)).
    """
    common = lca(first, second)
    return first.level + second.level - 2 * common.level


def descendants_at(
    interval: DyadicInterval, j: int, depth_bound: int | None = None
) -> list[DyadicInterval]:
    """𝒟_j(I), the 2^j descendants at relative depth j, left to right.

    Raises:
        ValueError: if j is negative or the descendants exceed depth_bound
    """
    if j < 0:
        raise ValueError(f"{j=} must be nonnegative")
    level = interval.level + j
    if depth_bound is not None and level > depth_bound:
        raise ValueError(f"descendants at {level=} exceed {depth_bound=}")
    first = interval.index << j
    return [DyadicInterval(level, first + offset) for offset in range(1 << j)]


@dataclass(frozen=True)
class Neighborhood:
    """Intervals within a dyadic distance of a center, with clipping metadata.

    Iterating yields (interval, distance) pairs ordered by distance, then level,
    then index. clipped is True when the depth bound removed candidates that
    exist in the unbounded tree.
    """

    center: DyadicInterval
    radius: int
    pairs: tuple[tuple[DyadicInterval, int], ...]
    clipped: bool = False

    def __iter__(self) -> Iterator[tuple[DyadicInterval, int]]:
        return iter(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def intervals(self) -> list[DyadicInterval]:
        """The neighbor intervals without distances."""
        return [interval for interval, _ in self.pairs]


def neighbors_within(
    interval: DyadicInterval, d: int, depth_bound: int | None = None
) -> Neighborhood:
    """All J with dist(I, J) <= d, including I at distance 0.

    Args:
        interval (DyadicInterval): the center I
        d (int): the distance radius
        depth_bound (int | None): deepest level that may be listed.
            Default = None (no bound)

    Returns:
        Neighborhood: the neighbors and a clipping flag
    """
    if d < 0:
        raise ValueError(f"{d=} must be nonnegative")
    found: dict[DyadicInterval, int] = {}
    clipped = False
    for up in range(min(d, interval.level) + 1):
        top = interval.ancestor(up)
        for down in range(d - up + 1):
            level = top.level + down
            if depth_bound is not None and level > depth_bound:
                clipped = True
                break
            first = top.index << down
            for offset in range(1 << down):
                candidate = DyadicInterval(level, first + offset)
                if candidate not in found:
                    found[candidate] = dyadic_distance(interval, candidate)
    pairs = sorted(
        found.items(), key=lambda item: (item[1], item[0].level, item[0].index)
    )
    return Neighborhood(interval, d, tuple(pairs), clipped)


def cousins(
    interval: DyadicInterval, n: int, depth_bound: int | None = None
) -> list[DyadicInterval]:
    """The cousins c_1(I), c_2(I), ...: disjoint J with 2 < dist(I, J) <= n + 2."""
    return [
        candidate
        for candidate, dist in neighbors_within(interval, n + 2, depth_bound)
        if dist > 2 and interval.disjoint(candidate)
    ]
