from __future__ import annotations

from haarlab.weights.characteristic import (
    PairScanner,
    WeightCharacteristic,
    build_badweight,
    c_p_b,
    char_Ap,
    char_Ap_b,
    char_Ap_N,
    char_one_sided_01,
)
from haarlab.weights.checks import (
    bad_weight_probes,
    bad_weight_ratio,
    balanced_sandwich,
    duality_check,
    fair_division_check,
    maximal_char_probe,
    pair_bound_below,
    shift_weight_bound,
    weighted_form_ratio,
    weighted_shift_ratio,
    weighted_weak_ratio,
)
