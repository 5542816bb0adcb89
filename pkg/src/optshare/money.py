"""Exact monetary arithmetic.

All mechanism math runs on exact rationals so that cost recovery and
share-threshold comparisons are decidable (equal shares like 100/3 never
terminate in decimal).  ``Money`` is :class:`fractions.Fraction`; the helpers
here handle parsing from decimal strings, fixed-precision rendering for CSV
output, and the distinguished "infinite" bid used to pin already-serviced
users in the online mechanisms.
"""

from __future__ import annotations

import math
from fractions import Fraction

Money = Fraction

ZERO = Fraction(0)

# Distinguished top bid: compares greater than every finite Money but never
# enters arithmetic (pinned users are counted, not summed).
INFINITE_BID = math.inf

Bid = Money | float  # a finite Fraction or INFINITE_BID


def is_infinite(value) -> bool:
    return value == INFINITE_BID


def parse_money(text: str) -> Money:
    """Parse a decimal string ("2.51") or ratio ("251/100") exactly."""
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a money value: {text!r}") from exc


def render_exact(value: Money) -> str:
    """Lossless numerator/denominator form used by detail/replay files."""
    return f"{value.numerator}/{value.denominator}"


def parse_exact(text: str) -> Money:
    num, _, den = text.partition("/")
    return Fraction(int(num), int(den) if den else 1)


def render_decimal(value: Money, digits: int = 9) -> str:
    """Render with a fixed number of fractional digits, round-half-even."""
    scale = 10**digits
    sign = "-" if value < 0 else ""
    scaled = _round_half_even(abs(value) * scale)
    whole, frac = divmod(scaled, scale)
    return f"{sign}{whole}.{frac:0{digits}d}" if digits else f"{sign}{whole}"


def render_decimal_sqrt(value: Money, digits: int = 9) -> str:
    """Render sqrt(value) to fixed precision (used for standard deviations).

    The square root of a rational is generally irrational; this computes the
    correctly rounded (half-even) decimal without going through floats.
    """
    if value < 0:
        raise ValueError("sqrt of negative value")
    scale = 10**digits
    target = value * scale * scale
    y = math.isqrt(target.numerator // target.denominator)
    # isqrt(floor(target)) can be off by one around the boundary; settle the
    # half-even rounding by exact comparisons against (y +/- 1/2)^2.
    while Fraction(2 * y + 1, 2) ** 2 < target:
        y += 1
    while y > 0 and Fraction(2 * y - 1, 2) ** 2 > target:
        y -= 1
    if Fraction(2 * y - 1, 2) ** 2 == target and (y % 2 == 1):
        y -= 1  # exact .5 tie below y: round to even
    elif Fraction(2 * y + 1, 2) ** 2 == target and (y % 2 == 1):
        y += 1  # exact .5 tie above y: round to even
    whole, frac = divmod(y, scale)
    return f"{whole}.{frac:0{digits}d}" if digits else str(whole)


def _round_half_even(value: Fraction) -> int:
    q, r = divmod(value.numerator, value.denominator)
    twice = 2 * r
    if twice > value.denominator or (twice == value.denominator and q % 2 == 1):
        q += 1
    return q
