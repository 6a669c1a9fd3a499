from __future__ import annotations

import json
import math
import os
from fractions import Fraction
from typing import TYPE_CHECKING, Any

import numpy as np

if TYPE_CHECKING:
    from collections.abc import Sequence

    from haarlab import ArithmeticMode


def determine_mode(use_mode: str | None = None) -> ArithmeticMode:
    """Determine the arithmetic mode for masses and function values.

    Args:
        use_mode (str): User specified mode, "float" or "rational".
            Default = None, which falls back to the HAARLAB_MODE environment
            variable and then to "float".

    Returns:
        ArithmeticMode: the resolved mode

    Raises:
        ValueError: if the mode is not one of "float" or "rational"
    """
    mode = use_mode or os.getenv("HAARLAB_MODE") or "float"
    if mode not in {"float", "rational"}:
        raise ValueError(f"{mode=} must be one of 'float' or 'rational'")
    return mode  # type: ignore[return-value]


class MaxMeter:
    """Running maximum, attaining tag and finite mean of a measured constant.

    Infinite observations (a vanishing dominator) still raise max, but they are
    counted in n_infinite instead of entering the mean.
    """

    def __init__(self) -> None:
        """Initialize the meter."""
        self.reset()

    def reset(self) -> None:
        """Forget every observation."""
        self.max = float("-inf")
        self.argmax: Any = None
        self.count = self.n_infinite = 0
        self._finite_sum = 0.0

    def update(self, val: float, tag: Any = None) -> None:
        """Record a new observation, keeping the first attaining tag on ties."""
        self.count += 1
        if val > self.max:
            self.max = float(val)
            self.argmax = tag
        if math.isfinite(val):
            self._finite_sum += float(val)
        else:
            self.n_infinite += 1

    @property
    def mean(self) -> float:
        """Mean of the finite observations, nan before the first one."""
        n_finite = self.count - self.n_infinite
        return self._finite_sum / n_finite if n_finite else math.nan


def fit_log2_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log2(ys) against log2(xs).

    Args:
        xs (Sequence[float]): positive abscissae, at least two distinct values
        ys (Sequence[float]): positive ordinates

    Returns:
        float: fitted slope
    """
    if len(xs) != len(ys) or len(xs) < 2:
        raise ValueError(f"need two or more points, got {len(xs)=}, {len(ys)=}")
    log_x = np.log2(np.asarray(xs, dtype=float))
    log_y = np.log2(np.asarray(ys, dtype=float))
    slope, _intercept = np.polyfit(log_x, log_y, deg=1)
    return float(slope)


def _json_default(obj: object) -> object:
    """Convert numpy scalars and fractions for serialization.

    Returns:
        object: JSON-serializable stand-in
    """
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


def read_json(filepath: str) -> Any:
    """Read the JSON file.

    Args:
        filepath (str): file name of JSON to read.

    Returns:
        dict | list: data stored in filepath
    """
    with open(filepath) as file:
        return json.load(file)


def write_json(dct: Any, filepath: str) -> None:
    """Write the JSON file.

    Args:
        dct (dict | list): data to write
        filepath (str): file name of JSON to write.
    """
    with open(filepath, mode="w") as file:
        json.dump(dct, file, default=_json_default, indent=2)


def dumps_json(dct: Any) -> str:
    """Serialize to a JSON string with the same conversions as write_json."""
    return json.dumps(dct, default=_json_default, indent=2, sort_keys=True)


def mkdir(path: str) -> str:
    """Make directory.

    Args:
        path (str): directory name

    Returns:
        path
    """
    if not os.path.exists(path):
        os.makedirs(path)
    return path
