from __future__ import annotations

from haarlab.utils.common_utils import (
    MaxMeter,
    determine_mode,
    dumps_json,
    fit_log2_slope,
    mkdir,
    read_json,
    write_json,
)
from haarlab.utils.literals import format_fraction, parse_fraction, parse_interval
