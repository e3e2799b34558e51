"""Exact arithmetic in the number field Q(i, sqrt 2).

An element is stored as four rationals (a, b, c, d) meaning
a + b*i + c*sqrt2 + d*i*sqrt2.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

from gmpy2 import mpq

_ZERO = mpq(0)
_ONE = mpq(1)


class FieldDivisionError(ZeroDivisionError):
    """Raised when dividing by the zero element of the field."""


Number = Union[int, Fraction, "Scalar"]


def _rational(value) -> mpq:
    if isinstance(value, type(_ZERO)):
        return value
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, int):
        return mpq(value)
    if isinstance(value, str):
        return mpq(value)
    raise TypeError(f"cannot convert {type(value).__name__} to a rational")


def _mul_sqrt2(p, q, r, s):
    """(p + q*sqrt2)(r + s*sqrt2) as a pair."""
    return p * r + 2 * q * s, p * s + q * r


class Scalar:
    """Immutable element a + b*i + c*sqrt2 + d*i*sqrt2 of Q(i, sqrt 2)."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a=0, b=0, c=0, d=0):
        object.__setattr__(self, "a", _rational(a))
        object.__setattr__(self, "b", _rational(b))
        object.__setattr__(self, "c", _rational(c))
        object.__setattr__(self, "d", _rational(d))

    @classmethod
    def _raw(cls, a, b, c, d) -> "Scalar":
        obj = object.__new__(cls)
        object.__setattr__(obj, "a", a)
        object.__setattr__(obj, "b", b)
        object.__setattr__(obj, "c", c)
        object.__setattr__(obj, "d", d)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("Scalar is immutable")

    def __reduce__(self):
        return (Scalar, (Fraction(int(self.a.numerator), int(self.a.denominator)),
                         Fraction(int(self.b.numerator), int(self.b.denominator)),
                         Fraction(int(self.c.numerator), int(self.c.denominator)),
                         Fraction(int(self.d.numerator), int(self.d.denominator))))

    # construction helpers

    @staticmethod
    def coerce(value) -> "Scalar":
        if isinstance(value, Scalar):
            return value
        if isinstance(value, str):
            return Scalar.parse(value)
        return Scalar._raw(_rational(value), _ZERO, _ZERO, _ZERO)

    @staticmethod
    def parse(text: str) -> "Scalar":
        """Parse any constant expression in i and r2 (sqrt 2), e.g. "1/2 - 3*i*r2"."""
        from .expr import parse_polynomial

        poly = parse_polynomial(text)
        if not poly.is_constant():
            raise ValueError(f"not a constant scalar: {text!r}")
        return poly.constant_term()

    # predicates

    def is_zero(self) -> bool:
        return not (self.a or self.b or self.c or self.d)

    def __bool__(self) -> bool:
        return not self.is_zero()

    def is_rational(self) -> bool:
        return not (self.b or self.c or self.d)

    def is_real(self) -> bool:
        return not (self.b or self.d)

    # arithmetic

    def __add__(self, other):
        if not isinstance(other, Scalar):
            if isinstance(other, (int, Fraction)) or type(other) is type(_ZERO):
                other = Scalar.coerce(other)
            else:
                return NotImplemented
        return Scalar._raw(self.a + other.a, self.b + other.b, self.c + other.c, self.d + other.d)

    __radd__ = __add__

    def __neg__(self):
        return Scalar._raw(-self.a, -self.b, -self.c, -self.d)

    def __sub__(self, other):
        if not isinstance(other, Scalar):
            if isinstance(other, (int, Fraction)) or type(other) is type(_ZERO):
                other = Scalar.coerce(other)
            else:
                return NotImplemented
        return Scalar._raw(self.a - other.a, self.b - other.b, self.c - other.c, self.d - other.d)

    def __rsub__(self, other):
        return Scalar.coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Scalar):
            if isinstance(other, (int, Fraction)) or type(other) is type(_ZERO):
                r = _rational(other)
                return Scalar._raw(self.a * r, self.b * r, self.c * r, self.d * r)
            return NotImplemented
        a, b, c, d = self.a, self.b, self.c, self.d
        e, f, g, h = other.a, other.b, other.c, other.d
        if not (b or c or d):
            return Scalar._raw(a * e, a * f, a * g, a * h)
        if not (f or g or h):
            return Scalar._raw(a * e, b * e, c * e, d * e)
        # real part (a + c s), imaginary part (b + d s), with s = sqrt 2
        rr = _mul_sqrt2(a, c, e, g)
        ii = _mul_sqrt2(b, d, f, h)
        ri = _mul_sqrt2(a, c, f, h)
        ir = _mul_sqrt2(b, d, e, g)
        return Scalar._raw(rr[0] - ii[0], ri[0] + ir[0], rr[1] - ii[1], ri[1] + ir[1])

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        a, b, c, d = self.a, self.b, self.c, self.d
        if not (b or c or d):
            if not a:
                raise FieldDivisionError("division by zero in Q(i, sqrt 2)")
            return Scalar._raw(1 / a, _ZERO, _ZERO, _ZERO)
        # |z|^2 = (a + c s)^2 + (b + d s)^2 = p + q s
        p = a * a + 2 * c * c + b * b + 2 * d * d
        q = 2 * a * c + 2 * b * d
        norm = p * p - 2 * q * q
        if not norm:
            raise FieldDivisionError("division by zero in Q(i, sqrt 2)")
        # 1/(p + q s) = (p - q s) / norm
        ip, iq = p / norm, -q / norm
        # conj_i(z) = (a + c s) - (b + d s) i
        re = _mul_sqrt2(a, c, ip, iq)
        im = _mul_sqrt2(-b, -d, ip, iq)
        return Scalar._raw(re[0], im[0], re[1], im[1])

    def __truediv__(self, other):
        if not isinstance(other, Scalar):
            if isinstance(other, (int, Fraction)) or type(other) is type(_ZERO):
                r = _rational(other)
                if not r:
                    raise FieldDivisionError("division by zero in Q(i, sqrt 2)")
                return Scalar._raw(self.a / r, self.b / r, self.c / r, self.d / r)
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return Scalar.coerce(other) * self.inverse()

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = ONE
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def conj_i(self) -> "Scalar":
        return Scalar._raw(self.a, -self.b, self.c, -self.d)

    def conj_sqrt2(self) -> "Scalar":
        return Scalar._raw(self.a, self.b, -self.c, -self.d)

    # comparison and hashing

    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self.a == other.a and self.b == other.b and self.c == other.c and self.d == other.d
        if isinstance(other, (int, Fraction)) or type(other) is type(_ZERO):
            return self.a == other and not (self.b or self.c or self.d)
        return NotImplemented

    def __hash__(self):
        if not (self.b or self.c or self.d):
            return hash(Fraction(int(self.a.numerator), int(self.a.denominator)))
        return hash((self.a, self.b, self.c, self.d))

    # conversions

    def to_complex(self) -> complex:
        s = 2 ** 0.5
        return complex(float(self.a) + float(self.c) * s, float(self.b) + float(self.d) * s)

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return Fraction(int(self.a.numerator), int(self.a.denominator))

    def components(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return tuple(Fraction(int(x.numerator), int(x.denominator)) for x in (self.a, self.b, self.c, self.d))

    def __str__(self) -> str:
        terms = []
        for coeff, unit in ((self.a, ""), (self.b, "i"), (self.c, "r2"), (self.d, "i*r2")):
            if not coeff:
                continue
            negative = coeff < 0
            mag = -coeff if negative else coeff
            num, den = int(mag.numerator), int(mag.denominator)
            magnitude = str(num) if den == 1 else f"{num}/{den}"
            if unit:
                body = unit if magnitude == "1" else f"{magnitude}*{unit}"
            else:
                body = magnitude
            terms.append((negative, body))
        if not terms:
            return "0"
        first_neg, first = terms[0]
        out = ("-" if first_neg else "") + first
        for negative, body in terms[1:]:
            out += (" - " if negative else " + ") + body
        return out

    def __repr__(self) -> str:
        return f"Scalar({str(self)!r})"


ZERO = Scalar()
ONE = Scalar(1)
I = Scalar(0, 1)
SQRT2 = Scalar(0, 0, 1)


def S(value) -> Scalar:
    """Shorthand coercion to Scalar."""
    return Scalar.coerce(value)
