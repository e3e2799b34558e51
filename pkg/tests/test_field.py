from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bggkit.field import I, ONE, ZERO, FieldDivisionError, Scalar
from helpers import scalars

SQRT2 = Scalar(0, 0, 1)


def test_units():
    assert I * I == -ONE
    assert SQRT2 * SQRT2 == Scalar(2)
    assert (I * SQRT2) ** 2 == Scalar(-2)


def test_parse_and_str_roundtrip():
    for text in ["0", "1/3", "-2*i", "1/2 + r2", "3 - 5/4*i*r2", "1 + i + r2 + i*r2"]:
        assert Scalar.parse(str(Scalar.parse(text))) == Scalar.parse(text)


def test_division_by_zero():
    with pytest.raises(FieldDivisionError):
        ONE / ZERO


def test_rational_comparison_and_hash():
    assert Scalar(Fraction(1, 2)) == Fraction(1, 2)
    assert hash(Scalar(3)) == hash(3)
    assert Scalar(Fraction(2, 3)).to_fraction() == Fraction(2, 3)
    with pytest.raises(ValueError):
        I.to_fraction()


def test_complex_conversion():
    assert abs((Scalar(1, 2, 3, 4)).to_complex() - complex(1 + 3 * 2 ** 0.5, 2 + 4 * 2 ** 0.5)) < 1e-14


@given(scalars, scalars, scalars)
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a - a == ZERO


@given(scalars)
def test_inverse(a):
    if a:
        assert a * a.inverse() == ONE
        assert (a / a) == ONE


@given(scalars, scalars)
def test_conjugations_are_automorphisms(a, b):
    assert (a * b).conj_i() == a.conj_i() * b.conj_i()
    assert (a + b).conj_sqrt2() == a.conj_sqrt2() + b.conj_sqrt2()
    assert (a * b).conj_sqrt2() == a.conj_sqrt2() * b.conj_sqrt2()


@given(scalars, st.integers(0, 6))
def test_power(a, n):
    expected = ONE
    for _ in range(n):
        expected = expected * a
    assert a ** n == expected
