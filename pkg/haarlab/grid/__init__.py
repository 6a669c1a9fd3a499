from __future__ import annotations

from haarlab.grid.dyadic import (
    ROOT,
    DyadicInterval,
    GridPosition,
    Neighborhood,
    ancestor,
    children,
    cousins,
    descendants_at,
    dyadic_distance,
    lca,
    neighbors_within,
    parent,
    sibling,
)
from haarlab.grid.measure import (
    BalanceReport,
    MeasureTree,
    balance_report,
    build_lmp,
    build_random_balanced,
    build_uniform,
    is_uniform_below,
    load_measure,
    m_value,
    mass,
    measure_from_spec,
    measure_to_spec,
)
