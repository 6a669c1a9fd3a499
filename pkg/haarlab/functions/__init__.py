from __future__ import annotations

from haarlab.functions.haar import (
    HaarCoefficients,
    analyze,
    haar_coefficient,
    haar_function,
    synthesize,
)
from haarlab.functions.stepfn import (
    DyadicStepFunction,
    IntegralTable,
    Weight,
    average,
    bmo_norm,
    conjugate_exponent,
    constant,
    distribution,
    function_from_records,
    function_to_records,
    indicator,
    inner,
    integral,
    integral_over,
    load_function,
    load_weight,
    lp_norm,
    random_step_function,
    random_weight,
    weighted_measure,
)
