"""Exact rational helpers.

Every real-valued quantity in the package is a :class:`fractions.Fraction`.
Floats are refused at the boundary; setting ``PBPSC_POISON_FLOAT=1`` also
makes any float/Fraction interaction raise, which is how the test suite
proves that no float sneaks into a computation.
"""

from __future__ import annotations

import os
from decimal import Decimal
from fractions import Fraction

Rat = Fraction

POISON_ENV = "PBPSC_POISON_FLOAT"


def to_rat(value) -> Fraction:
    """Convert ``value`` to an exact rational.

    Accepts ints, Fractions, Decimals and strings such as ``"0.9"``,
    ``"21/10"`` or ``"3"``. Floats and bools are rejected because their
    binary representation would silently corrupt threshold comparisons.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rational quantities")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Decimal):
        if not value.is_finite():
            raise ValueError(f"non-finite quantity {value}")
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"not an exact decimal or p/q literal: {value!r}") from None
    raise TypeError(f"cannot use {type(value).__name__} {value!r} as an exact quantity")


def fmt_rat(value: Fraction) -> str:
    """Canonical ``"p/q"`` rendering (integers keep the ``/1``)."""
    return f"{value.numerator}/{value.denominator}"


class FloatPoisoned(TypeError):
    pass


def _refuse(*_args, **_kwargs):
    raise FloatPoisoned("floating-point value reached exact arithmetic")


_installed = False


def poison_floats() -> None:
    """Make every float <-> Fraction conversion raise.

    Mixed Fraction/float arithmetic goes through ``Fraction.__float__`` and
    mixed comparisons through ``Fraction.from_float``, so patching those two
    plus the constructor covers all construction paths.
    """
    global _installed
    if _installed:
        return
    original_new = Fraction.__new__

    def guarded_new(cls, numerator=0, denominator=None, **kwargs):
        if isinstance(numerator, float) or isinstance(denominator, float):
            _refuse()
        return original_new(cls, numerator, denominator, **kwargs)

    Fraction.__new__ = guarded_new
    Fraction.__float__ = _refuse
    Fraction.from_float = classmethod(_refuse)
    _installed = True


def poison_requested() -> bool:
    return os.environ.get(POISON_ENV, "") not in ("", "0")
