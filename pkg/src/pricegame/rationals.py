"""Parsing and rendering of exact rational values.

Every number the engine touches is a :class:`fractions.Fraction`; floats are
rejected at the boundary so that no rounding can sneak in.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm

from .errors import ValidationError


def parse_value(raw) -> Fraction:
    """Convert an int, a Fraction, or a ``"num/den"`` string to a Fraction.

    Decimal floats are rejected: exact equality of prices and marginal values
    drives every tie-break in the engine.
    """
    if isinstance(raw, Fraction):
        return raw
    if isinstance(raw, bool):
        raise ValidationError(f"expected a rational number, got {raw!r}")
    if isinstance(raw, int):
        return Fraction(raw)
    if isinstance(raw, float):
        raise ValidationError(
            f"floating point value {raw!r} rejected; use an integer or 'num/den'"
        )
    if isinstance(raw, str):
        text = raw.strip()
        try:
            if "/" in text:
                num, den = text.split("/")
                return Fraction(int(num), int(den))
            return Fraction(int(text))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"cannot parse rational {raw!r}: {exc}") from None
    raise ValidationError(f"cannot parse rational from {type(raw).__name__} {raw!r}")


def format_value(v: Fraction) -> str:
    """Canonical machine rendering, always ``num/den``."""
    return f"{v.numerator}/{v.denominator}"


def format_human(v: Fraction) -> str:
    """Human rendering: plain integer when exact, otherwise ``num/den (~x.xxx)``."""
    if v.denominator == 1:
        return str(v.numerator)
    return f"{v.numerator}/{v.denominator} (~{float(v):.6g})"


def common_scale(values) -> int:
    """Least common multiple of the denominators of ``values``."""
    scale = 1
    for v in values:
        scale = lcm(scale, v.denominator)
    return scale
