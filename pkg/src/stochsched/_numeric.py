"""Exact rational helpers shared across the package."""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Integral, Rational
from typing import Union

RationalLike = Union[int, str, Fraction]


def as_fraction(value, *, allow_float: bool = False) -> Fraction:
    """Convert ``value`` to an exact :class:`Fraction`.

    Accepts integers, ``Fraction``/``Rational`` instances and strings such as
    ``"3/7"`` or ``"12"``. Floats are rejected unless ``allow_float`` is set,
    in which case their exact binary value is used.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rational sizes")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Integral):
        return Fraction(int(value))
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty rational literal")
        if any(c in text for c in ".eE") and "/" not in text:
            raise ValueError(f"decimal literal {value!r} is not accepted; use num/den")
        return Fraction(text)
    if isinstance(value, float) or hasattr(value, "__float__"):
        if not allow_float:
            raise TypeError(f"floating value {value!r} rejected; pass an exact rational")
        x = float(value)
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(x)
    raise TypeError(f"cannot interpret {value!r} as a rational")


def format_fraction(value: Fraction) -> str:
    """``"num/den"`` (or ``"num"`` for integers)."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def ceil_div(a: Fraction, b: Fraction) -> int:
    return -((-a) // b)


def power_ceil(value: Fraction, base: Fraction) -> tuple[int, Fraction]:
    """Smallest ``(r, base**r)`` with ``base**r >= value`` (``value > 0``, ``base > 1``)."""
    if value <= 0:
        raise ValueError("value must be positive")
    r = math.ceil(math.log(value) / math.log(base)) if value != 1 else 0
    v = base ** r
    while v < value:
        r += 1
        v *= base
    while True:
        lower = v / base
        if lower >= value:
            r -= 1
            v = lower
        else:
            return r, v


def power_floor(value: Fraction, base: Fraction) -> tuple[int, Fraction]:
    """Largest ``(r, base**r)`` with ``base**r <= value``."""
    r, v = power_ceil(value, base)
    if v == value:
        return r, v
    return r - 1, v / base


def nth_root_float(value, p) -> float:
    """Float ``value ** (1/p)`` for a nonnegative rational ``value``."""
    x = Fraction(value)
    if x == 0:
        return 0.0
    p = float(p)
    try:
        return float(x) ** (1.0 / p)
    except OverflowError:
        return math.exp((math.log(x.numerator) - math.log(x.denominator)) / p)
