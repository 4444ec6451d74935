"""Exact Gaussian-rational arithmetic.

Rationals are :class:`fractions.Fraction` (always reduced, positive
denominator).  :class:`GaussRational` pairs two of them into an element of
Q(i), the coefficient field for every symbolic computation in the package.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational

__all__ = ["GaussRational", "as_gauss", "parse_rational", "format_rational", "to_complex_float"]

_ZERO = Fraction(0)
_ONE = Fraction(1)


class GaussRational:
    """A complex number ``re + im*i`` with exact rational parts.

    Immutable and hashable.  Mixed arithmetic with ``int`` and ``Fraction``
    is supported; floats are refused so that exactness is never lost silently.
    """

    __slots__ = ("re", "im", "_hash")

    def __init__(self, re=0, im=0):
        if not isinstance(re, Fraction):
            re = _to_fraction(re)
        if not isinstance(im, Fraction):
            im = _to_fraction(im)
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("GaussRational is immutable")

    # ------------------------------------------------------------------
    @classmethod
    def _make(cls, re: Fraction, im: Fraction) -> GaussRational:
        obj = object.__new__(cls)
        object.__setattr__(obj, "re", re)
        object.__setattr__(obj, "im", im)
        object.__setattr__(obj, "_hash", None)
        return obj

    def is_zero(self) -> bool:
        return not self.re and not self.im

    def is_real(self) -> bool:
        return not self.im

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, GaussRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return not self.im and self.re == other
        return NotImplemented

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash(self.re) if not self.im else hash((self.re, self.im))
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        return f"GaussRational({format_gauss(self)!r})"

    def __str__(self):
        return format_gauss(self)

    # arithmetic --------------------------------------------------------
    def __neg__(self):
        return GaussRational._make(-self.re, -self.im)

    def __pos__(self):
        return self

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return GaussRational._make(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return GaussRational._make(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        a, b, c, d = self.re, self.im, other.re, other.im
        if not b and not d:
            return GaussRational._make(a * c, _ZERO)
        return GaussRational._make(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def inverse(self) -> GaussRational:
        a, b = self.re, self.im
        if not b:
            if not a:
                raise ZeroDivisionError("division by zero GaussRational")
            return GaussRational._make(1 / a, _ZERO)
        n = a * a + b * b
        return GaussRational._make(a / n, -b / n)

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result = GaussRational._make(_ONE, _ZERO)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conjugate(self) -> GaussRational:
        return GaussRational._make(self.re, -self.im)

    def norm2(self) -> Fraction:
        """Squared modulus ``re^2 + im^2`` (exact)."""
        return self.re * self.re + self.im * self.im

    def __complex__(self):
        return to_complex_float(self)


ZERO = GaussRational._make(_ZERO, _ZERO)
ONE = GaussRational._make(_ONE, _ZERO)
I = GaussRational._make(_ZERO, _ONE)


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        return Fraction(int(x))
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def _coerce(x):
    if isinstance(x, GaussRational):
        return x
    if isinstance(x, (int, Fraction)):
        return GaussRational._make(Fraction(x), _ZERO)
    return NotImplemented


def as_gauss(x) -> GaussRational:
    """Convert ``int``, ``Fraction``, ``str`` or ``GaussRational`` to ``GaussRational``."""
    if isinstance(x, GaussRational):
        return x
    if isinstance(x, str):
        return parse_gauss(x)
    return GaussRational(_to_fraction(x))


def to_complex_float(a: GaussRational) -> complex:
    """Round each part independently to the nearest double.

    Raises
    ------
    OverflowError
        If a part is too large for a double.
    """
    a = as_gauss(a)
    # Fraction.__float__ is correctly rounded (integer true division).
    re = a.re.numerator / a.re.denominator
    im = a.im.numerator / a.im.denominator
    if math.isinf(re) or math.isinf(im):
        raise OverflowError(f"{a} does not fit in a double")
    return complex(re, im)


# text form -------------------------------------------------------------

_RAT_RE = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")
_GAUSS_RE = re.compile(
    r"^\s*\(\s*([+-]?\d+(?:/\d+)?)\s*\)\s*([+-])\s*\(\s*([+-]?\d+(?:/\d+)?)\s*\)\s*i\s*$"
)


def parse_rational(text: str) -> Fraction:
    m = _RAT_RE.match(text)
    if not m:
        raise ValueError(f"not a rational literal: {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) else 1
    if den == 0:
        raise ZeroDivisionError(f"zero denominator in {text!r}")
    return Fraction(num, den)


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def parse_gauss(text: str) -> GaussRational:
    """Parse ``"a/b"`` or ``"(a/b)+(c/d)i"``."""
    m = _GAUSS_RE.match(text)
    if m:
        im = parse_rational(m.group(3))
        if m.group(2) == "-":
            im = -im
        return GaussRational(parse_rational(m.group(1)), im)
    return GaussRational(parse_rational(text))


def format_gauss(a: GaussRational) -> str:
    if not a.im:
        return format_rational(a.re)
    sign = "-" if a.im < 0 else "+"
    return f"({format_rational(a.re)}){sign}({format_rational(abs(a.im))})i"
