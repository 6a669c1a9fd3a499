from __future__ import annotations

from haarlab.operators.maximal import (
    MaximalResult,
    c_one,
    level_set_collection,
    maximal,
    maximal_N,
    maximal_weighted,
    weak11_ratio,
)
from haarlab.operators.shift import (
    HaarShift,
    RandomRule,
    apply,
    bilinear,
    dyadic_hilbert,
    dyadic_hilbert_adjoint,
    empirical_opnorm,
    haar_multiplier,
    make_shift,
    random_shift,
    shift_from_token,
    shift_left_left,
    sign_aligned_shift,
)
