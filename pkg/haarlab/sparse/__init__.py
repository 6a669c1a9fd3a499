from __future__ import annotations

from haarlab.sparse.czd import (
    DEFAULT_MULTIPLIER,
    CZDecomposition,
    GoodRegion,
    cz_decompose,
    good_region,
    select_intervals,
    stopping_children,
    stopping_family,
    stopping_union,
)
from haarlab.sparse.family import (
    SparseFamily,
    augment_parents,
    build_sparse_collection,
    family_from_dict,
    family_to_dict,
    packing_constant,
    witness_assignment,
)
from haarlab.sparse.forms import (
    form_A,
    form_C_intro,
    form_C_N,
    form_hilbert_refined,
    weak_type_functional,
)
