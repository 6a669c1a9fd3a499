"""Parsers for the text literals accepted in config files and on the command line."""

from __future__ import annotations

import re
from fractions import Fraction
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from haarlab.grid.dyadic import DyadicInterval

_CHAIN_RE = re.compile(r"^I(\d+)(b?)$")
_LEVEL_INDEX_RE = re.compile(r"^(\d+):(\d+)$")


def parse_interval(text: str) -> DyadicInterval:
    """Parse an interval literal.

    Accepted forms are "L:IDX" (level and index), "root", and the chain
    shorthands "Ik" for (k, 0) and "Ikb" for (k, 1).

    Args:
        text (str): the literal

    Returns:
        DyadicInterval: the parsed interval

    Raises:
        ValueError: if the literal matches none of the forms
    """
    from haarlab.grid.dyadic import DyadicInterval

    text = text.strip()
    if text == "root":
        return DyadicInterval(0, 0)
    if match := _LEVEL_INDEX_RE.match(text):
        return DyadicInterval(int(match[1]), int(match[2]))
    if match := _CHAIN_RE.match(text):
        level = int(match[1])
        if match[2] and level == 0:
            raise ValueError(f"{text=} has no sibling: the root is not split")
        return DyadicInterval(level, 1 if match[2] else 0)
    raise ValueError(f"cannot parse interval literal {text=}, expected 'L:IDX'")


def parse_fraction(value: str | float | int) -> Fraction:
    """Parse "num/den", a decimal string or a number into an exact Fraction."""
    if isinstance(value, bool):
        raise TypeError(f"{value=} is not a number")
    if isinstance(value, (int, float)):
        return Fraction(value)
    try:
        return Fraction(value.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse fraction literal {value=}") from exc


def format_fraction(value: Fraction | float) -> str | float:
    """Inverse of parse_fraction for Fractions, floats pass through."""
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    return value
