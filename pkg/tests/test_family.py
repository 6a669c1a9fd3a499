from __future__ import annotations

from fractions import Fraction
from typing import TYPE_CHECKING

import pytest

from haarlab.functions.stepfn import indicator
from haarlab.grid.dyadic import ROOT, DyadicInterval
from haarlab.sparse.family import (
    SparseFamily,
    augment_parents,
    build_sparse_collection,
    family_from_dict,
    family_to_dict,
    packing_constant,
    witness_assignment,
)

if TYPE_CHECKING:
    from haarlab.grid.measure import MeasureTree

CHAIN = [ROOT, DyadicInterval(1, 0), DyadicInterval(2, 0)]


def test_nested_chain_packing(uniform: MeasureTree) -> None:
    assert packing_constant(uniform, CHAIN) == Fraction(7, 4)
    assert packing_constant(uniform, CHAIN[1:]) == Fraction(3, 2)
    assert packing_constant(uniform, []) == 0


def test_witness(uniform: MeasureTree) -> None:
    witness, eta = witness_assignment(uniform, CHAIN)
    assert witness[ROOT] == [DyadicInterval(1, 1)]
    assert witness[DyadicInterval(1, 0)] == [DyadicInterval(2, 1)]
    assert witness[DyadicInterval(2, 0)] == [DyadicInterval(2, 0)]
    assert eta == Fraction(1, 2)

    _, eta = witness_assignment(uniform, [ROOT, *ROOT.children])
    assert eta == 0


def test_witness_pieces_are_disjoint(lmp: MeasureTree) -> None:
    members = [ROOT, DyadicInterval(1, 0), DyadicInterval(3, 1), DyadicInterval(5, 0)]
    family = SparseFamily.build(lmp, members)
    pieces = [piece for parts in family.witness.values() for piece in parts]
    for idx, piece in enumerate(pieces):
        assert all(piece.disjoint(other) for other in pieces[idx + 1 :])
    for member, parts in family.witness.items():
        assert all(member.contains(piece) for piece in parts)
    assert family.eta > 0
    assert DyadicInterval(3, 1) in family
    assert len(family) == 4


def test_augment_parents(uniform: MeasureTree) -> None:
    family = SparseFamily.build(uniform, [DyadicInterval(2, 0), DyadicInterval(2, 1)])
    assert family.packing_constant == 1
    augmented = augment_parents(uniform, family)
    assert augmented.members == [
        DyadicInterval(1, 0),
        DyadicInterval(2, 0),
        DyadicInterval(2, 1),
    ]
    assert augmented.packing_constant == 2
    assert augment_parents(uniform, augmented).members == augmented.members


def test_union(uniform: MeasureTree) -> None:
    first = SparseFamily.build(uniform, CHAIN[:2])
    second = SparseFamily.build(uniform, CHAIN[1:])
    assert first.union(uniform, second).members == CHAIN


def test_build_sparse_collection(uniform: MeasureTree) -> None:
    func = indicator(DyadicInterval(6, 0))
    family = build_sparse_collection(uniform, func, func, 6)
    assert family.root == ROOT
    assert family.members == [ROOT, DyadicInterval(5, 0)]
    assert family.packing_constant <= 2
    coarse = build_sparse_collection(uniform, func, func, 6, multiplier=2)
    assert coarse.members == [
        ROOT,
        DyadicInterval(2, 0),
        DyadicInterval(4, 0),
        DyadicInterval(6, 0),
    ]


def test_build_sparse_collection_errors(uniform: MeasureTree) -> None:
    func = indicator(DyadicInterval(6, 0))
    with pytest.raises(ValueError, match="embed the functions deeper"):
        build_sparse_collection(uniform, func, func, 7)
    zero = 0 * func
    with pytest.raises(ValueError, match="nonzero"):
        build_sparse_collection(uniform, zero, zero, 0)


def test_family_dict(lmp: MeasureTree) -> None:
    family = SparseFamily.build(lmp, CHAIN, root=ROOT)
    data = family_to_dict(family)
    assert data["members"] == ["0:0", "1:0", "2:0"]
    assert data["root"] == "0:0"
    assert data["packing"] == pytest.approx(float(family.packing_constant))
    assert family_from_dict(lmp, data) == family
