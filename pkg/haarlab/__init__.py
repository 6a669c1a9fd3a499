"""Numerical laboratory for dyadic harmonic analysis on balanced measures."""

from __future__ import annotations

from fractions import Fraction
from importlib.metadata import PackageNotFoundError, version
from typing import Literal, Union

try:
    __version__ = version(__name__)  # read from pyproject.toml
except PackageNotFoundError:
    __version__ = "unknown"

ArithmeticMode = Literal["float", "rational"]
MeasureKind = Literal["uniform", "lmp", "random", "explicit"]
OutputFormat = Literal["csv", "json"]

Number = Union[float, Fraction]
