"""Exact rational scalars.

All verification arithmetic runs on :class:`gmpy2.mpq`, which keeps numerator
and denominator in lowest terms with a positive denominator.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational as _RationalABC

import gmpy2

Q = gmpy2.mpq
ZERO = Q(0)
ONE = Q(1)


def to_q(value) -> gmpy2.mpq:
    """Coerce ints, Fractions, mpq and ``"p/q"`` strings to an exact rational.

    Floats are rejected: silently converting them would smuggle rounding
    error into the exact path.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, type(ZERO))):
        return Q(value)
    if isinstance(value, Fraction) or isinstance(value, _RationalABC):
        return Q(value.numerator, value.denominator)
    if isinstance(value, str):
        text = value.strip()
        try:
            return Q(text)
        except ValueError as exc:
            raise ValueError(f"not a rational literal: {value!r}") from exc
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def q_str(value) -> str:
    """Canonical text form, ``"p/q"`` or ``"p"``."""
    return str(Q(value))


def is_rational_square(value) -> bool:
    v = Q(value)
    if v < 0:
        return False
    return gmpy2.is_square(v.numerator) and gmpy2.is_square(v.denominator)


def rational_sqrt(value):
    """Exact square root of a rational perfect square, else ``None``."""
    v = Q(value)
    if not is_rational_square(v):
        return None
    return Q(gmpy2.isqrt(v.numerator), gmpy2.isqrt(v.denominator))
