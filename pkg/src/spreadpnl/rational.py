"""Exact-number helpers: coercion to ``Fraction`` and decimal rendering.

All accounting quantities are kept as :class:`fractions.Fraction`. Conversion
to decimal text only happens at the reporting boundary.
"""

from __future__ import annotations

from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction
from numbers import Rational
from typing import Optional, Union

Number = Union[int, str, Fraction, Decimal, float]


def to_fraction(value: Number) -> Fraction:
    """Coerce ``value`` to an exact ``Fraction``.

    Floats go through their shortest repr so ``170.25`` stays ``681/4`` and
    ``0.1`` becomes ``1/10`` rather than its binary expansion.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise ValueError(f"non-finite value: {value!r}")
        return Fraction(repr(value))
    if isinstance(value, Decimal):
        if not value.is_finite():
            raise ValueError(f"non-finite value: {value!r}")
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip().replace("_", "")
        if not text:
            raise ValueError("empty number")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a number: {value!r}") from exc
    raise TypeError(f"cannot convert {type(value).__name__} to Fraction")


def is_terminating(value: Fraction) -> bool:
    """True when ``value`` has a finite decimal expansion."""
    den = value.denominator
    for p in (2, 5):
        while den % p == 0:
            den //= p
    return den == 1


def exact_str(value: Fraction) -> str:
    """Lossless text form: plain decimal when it terminates, else ``n/d``."""
    if value.denominator == 1:
        return str(value.numerator)
    if is_terminating(value):
        # a denominator 2^a 5^b needs exactly max(a, b) decimal places
        den, twos, fives = value.denominator, 0, 0
        while den % 2 == 0:
            den, twos = den // 2, twos + 1
        while den % 5 == 0:
            den, fives = den // 5, fives + 1
        return format_decimal(value, max(twos, fives))
    return f"{value.numerator}/{value.denominator}"


def format_decimal(value: Optional[Fraction], places: int, *, thousands: str = "") -> str:
    """Round ``value`` half-even to ``places`` decimals; ``None`` renders as NaN."""
    if value is None:
        return "NaN"
    if places < 0:
        raise ValueError("places must be >= 0")
    with localcontext() as ctx:
        ctx.prec = max(50, len(str(abs(value.numerator))) + places + 10)
        dec = Decimal(value.numerator) / Decimal(value.denominator)
        quantum = Decimal(1).scaleb(-places)
        dec = dec.quantize(quantum, rounding=ROUND_HALF_EVEN)
    if dec.is_zero():
        dec = abs(dec)
    if thousands:
        return f"{dec:,.{places}f}".replace(",", thousands)
    return f"{dec:.{places}f}"
