from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

from haarlab.grid.dyadic import DyadicInterval, lca
from haarlab.sparse.czd import DEFAULT_MULTIPLIER, stopping_children

if TYPE_CHECKING:
    from collections.abc import Iterable

    from typing_extensions import Self

    from haarlab import Number
    from haarlab.functions.stepfn import DyadicStepFunction
    from haarlab.grid.measure import MeasureTree


@dataclass
class SparseFamily:
    """A finite family of dyadic intervals with its sparsity certificates.

    packing_constant is the Carleson constant max_I Σ_{J∈S, J⊆I} μ(J) / μ(I).
    When a witness is attached, witness[I] lists disjoint dyadic pieces of
    E_I ⊆ I, and eta = min μ(E_I) / μ(I).
    """

    members: list[DyadicInterval]
    packing_constant: Number
    witness: dict[DyadicInterval, list[DyadicInterval]] | None = None
    eta: Number | None = None
    root: DyadicInterval | None = field(default=None, compare=False)
    _lookup: frozenset[DyadicInterval] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        self._lookup = frozenset(self.members)

    @classmethod
    def build(
        cls,
        tree: MeasureTree,
        members: Iterable[DyadicInterval],
        *,
        with_witness: bool = True,
        root: DyadicInterval | None = None,
    ) -> Self:
        """Certify a set of intervals: packing constant, witness and η."""
        members = sorted(set(members))
        witness, eta = None, None
        if with_witness:
            witness, eta = witness_assignment(tree, members)
        return cls(members, packing_constant(tree, members), witness, eta, root)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, interval: object) -> bool:
        return interval in self._lookup

    def union(self, tree: MeasureTree, other: SparseFamily) -> SparseFamily:
        """S ∪ S' with recomputed certificates."""
        return SparseFamily.build(tree, [*self.members, *other.members])


def _closure(members: Iterable[DyadicInterval]) -> set[DyadicInterval]:
    nodes: set[DyadicInterval] = set()
    for member in members:
        node = member
        while node not in nodes:
            nodes.add(node)
            if node.is_root:
                break
            node = node.parent
    return nodes


def packing_constant(tree: MeasureTree, members: Iterable[DyadicInterval]) -> Number:
    """max over I of Σ_{J∈S, J⊆I} μ(J) / μ(I), exact.

    Only I in the ancestor closure of S can attain the max, and the sums are
    accumulated bottom-up over that closure.
    """
    members = set(members)
    if not members:
        return tree.number(0)
    nodes = _closure(members)
    sums: dict[DyadicInterval, Number] = {node: tree.number(0) for node in nodes}
    for member in members:
        sums[member] += tree.mass(member)
    best: Number = tree.number(0)
    for node in sorted(nodes, reverse=True):
        best = max(best, sums[node] / tree.mass(node))
        if not node.is_root:
            sums[node.parent] += sums[node]
    return best


def _complement(
    top: DyadicInterval, holes: list[DyadicInterval]
) -> list[DyadicInterval]:
    """Dyadic pieces of top minus the disjoint holes."""
    if not holes:
        return [top]
    path: set[DyadicInterval] = set()
    for hole in holes:
        node = hole
        while node != top and node not in path:
            path.add(node)
            node = node.parent
    return sorted(node.sibling for node in path if node.sibling not in path)


def witness_assignment(
    tree: MeasureTree, members: Iterable[DyadicInterval]
) -> tuple[dict[DyadicInterval, list[DyadicInterval]], Number]:
    """E_I = I minus its maximal strict sub-members, and η = min μ(E_I) / μ(I).

    The sets E_I are pairwise disjoint. η = 0 signals that some E_I is null,
    and the packing constant is then the only certificate.
    """
    members = sorted(set(members))
    member_set = set(members)
    maximal_below: dict[DyadicInterval, list[DyadicInterval]] = {
        member: [] for member in members
    }
    for member in members:
        for ancestor in member.ancestors():
            if ancestor in member_set:
                maximal_below[ancestor].append(member)
                break
    witness: dict[DyadicInterval, list[DyadicInterval]] = {}
    eta: Number = tree.number(1)
    for member in members:
        holes = maximal_below[member]
        witness[member] = _complement(member, holes)
        covered = sum((tree.mass(hole) for hole in holes), tree.number(0))
        free = tree.mass(member) - covered
        eta = min(eta, free / tree.mass(member))
    return witness, eta


def build_sparse_collection(
    tree: MeasureTree,
    f1: DyadicStepFunction,
    f2: DyadicStepFunction,
    root_pad: int,
    *,
    multiplier: Number = DEFAULT_MULTIPLIER,
) -> SparseFamily:
    """S = {I_0} ∪ ⋃_k ℬ_k(I_0) with I_0 = Ĩ_0^{(root_pad)}.

    Ĩ_0 is the smallest dyadic interval containing the supports of f1 and f2.
    The family does not depend on the shift, only root_pad does.

    Raises:
        ValueError: if both functions vanish or the support is too close to root
    """
    support = [*f1.support(), *f2.support()]
    if not support:
        raise ValueError("build_sparse_collection needs a nonzero function")
    common = support[0]
    for cell in support[1:]:
        common = lca(common, cell)
    if common.level < root_pad:
        raise ValueError(
            f"support interval {common} has level {common.level} < {root_pad=}, "
            "embed the functions deeper in the grid"
        )
    top = common.ancestor(root_pad)
    members = [top]
    frontier = [top]
    while frontier:
        frontier = [
            child
            for member in frontier
            for child in stopping_children(tree, f1, f2, member, multiplier)
        ]
        members.extend(frontier)
    return SparseFamily.build(tree, members, root=top)


def augment_parents(tree: MeasureTree, family: SparseFamily) -> SparseFamily:
    """Add Ĵ whenever J and its sibling both belong to S."""
    member_set = set(family.members)
    added = {
        member.parent
        for member in member_set
        if not member.is_root and member.is_left and member.sibling in member_set
    }
    return SparseFamily.build(tree, member_set | added, root=family.root)


def family_to_dict(family: SparseFamily) -> dict[str, Any]:
    """The export {"members": ["L:IDX", ...], "packing": real, "eta": real?}."""
    out: dict[str, Any] = {
        "members": [str(member) for member in family.members],
        "packing": float(family.packing_constant),
    }
    if family.eta is not None:
        out["eta"] = float(family.eta)
    if family.root is not None:
        out["root"] = str(family.root)
    return out


def family_from_dict(tree: MeasureTree, data: dict[str, Any]) -> SparseFamily:
    """Rebuild a family from its export; the certificates are recomputed."""
    members = [DyadicInterval.from_str(text) for text in data["members"]]
    root = DyadicInterval.from_str(data["root"]) if "root" in data else None
    return SparseFamily.build(tree, members, root=root)
