"""Exact rational cost arithmetic and its JSON form.

Costs are computed as fractions.Fraction end to end. In JSON they are
written as a plain integer when integral, otherwise as the string "p/q";
floats never enter a log file.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any

__all__ = ["as_fraction", "ratio_to_json", "ratio_from_json"]


def as_fraction(value: Any, name: str = "value") -> Fraction:
    """Exact conversion from config-file values.

    Floats go through their decimal string so that 0.5 means 1/2, not the
    binary expansion of the nearest double.
    """
    if isinstance(value, bool):
        raise ValueError(f"{name} must be numeric, got {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(str(value))
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"{name} is not a rational literal: {value!r}") from exc
    raise ValueError(f"{name} must be numeric, got {type(value).__name__}")


def ratio_to_json(value: Fraction | int) -> int | str:
    frac = Fraction(value)
    if frac.denominator == 1:
        return int(frac)
    return f"{frac.numerator}/{frac.denominator}"


def ratio_from_json(value: Any, name: str = "value") -> Fraction:
    if isinstance(value, bool) or isinstance(value, float):
        raise ValueError(f"{name} must be an int or 'p/q' string, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise ValueError(f"{name} must be an int or 'p/q' string, got {value!r}")
