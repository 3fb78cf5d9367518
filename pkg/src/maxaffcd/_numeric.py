"""Scalar plumbing shared by the float and exact-rational code paths."""
from __future__ import annotations

import enum
import math
from decimal import Decimal
from fractions import Fraction
from numbers import Rational


class NumericMode(str, enum.Enum):
    FLOAT = "float"
    EXACT = "exact"

    @classmethod
    def coerce(cls, value) -> "NumericMode":
        if isinstance(value, cls):
            return value
        if isinstance(value, bool):
            return cls.EXACT if value else cls.FLOAT
        return cls(str(value).lower())


def to_exact(value) -> Fraction:
    """Convert an int, Fraction or decimal string to a Fraction.

    Floats are accepted only when they are integral; anything else would
    smuggle binary rounding into an exact computation.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not an exact rational: {value!r}") from exc
    if isinstance(value, Decimal):
        if not value.is_finite():
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value) or value != int(value):
            raise ValueError(
                f"float {value!r} has no exact decimal meaning; pass a string"
            )
        return Fraction(int(value))
    raise TypeError(f"cannot convert {type(value).__name__} to a rational")


def to_float(value) -> float:
    if isinstance(value, str):
        value = Fraction(value.strip())
    out = float(value)
    if not math.isfinite(out):
        raise ValueError(f"non-finite value {value!r}")
    return out


def converter(mode):
    return to_exact if NumericMode.coerce(mode) is NumericMode.EXACT else to_float


def is_finite(value) -> bool:
    if isinstance(value, Fraction):
        return True
    try:
        return math.isfinite(value)
    except TypeError:
        return False


def format_number(value) -> str:
    """Render a number as text without losing information.

    Fractions with a terminating decimal expansion are written in decimal
    notation, others as ``p/q``. Floats use ``repr`` (shortest round-trip).
    """
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        den = value.denominator
        twos = fives = 0
        while den % 2 == 0:
            den //= 2
            twos += 1
        while den % 5 == 0:
            den //= 5
            fives += 1
        if den != 1:
            return f"{value.numerator}/{value.denominator}"
        digits = max(twos, fives)
        scaled = value * 10**digits
        sign = "-" if scaled < 0 else ""
        text = str(abs(scaled.numerator)).rjust(digits + 1, "0")
        return f"{sign}{text[:-digits]}.{text[-digits:]}"
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def parse_number(text: str, mode):
    """Parse a decimal or ``p/q`` string in the given numeric mode."""
    return converter(mode)(text)
