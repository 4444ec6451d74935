from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from curvecap.exactnum import (
    ONE,
    ZERO,
    GaussRational,
    I,
    format_gauss,
    parse_gauss,
    parse_rational,
    to_complex_float,
)

fractions = st.fractions(max_denominator=10**6).filter(lambda q: abs(q) < 10**9)
gauss = st.builds(GaussRational, fractions, fractions)


def test_i_squared_is_minus_one():
    assert I * I == GaussRational(-1)


def test_division_exact():
    a = GaussRational(1, 2)
    b = GaussRational(Fraction(3, 4), -5)
    assert (a / b) * b == a


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        ONE / ZERO


def test_floats_refused():
    with pytest.raises(TypeError):
        GaussRational(0.5)


def test_parse_and_format_roundtrip():
    for text in ["3", "-7/2", "(1/2)+(3/4)i", "(0)-(1)i"]:
        assert parse_gauss(format_gauss(parse_gauss(text))) == parse_gauss(text)
    with pytest.raises(ValueError):
        parse_rational("1.5")


def test_to_complex_float_rounds_each_part():
    z = to_complex_float(GaussRational(Fraction(1, 3), Fraction(-2, 7)))
    assert z == complex(1 / 3, -2 / 7)
    with pytest.raises(OverflowError):
        to_complex_float(GaussRational(10**400))


@given(gauss, gauss, gauss)
def test_field_axioms(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert a * b == b * a
    if not b.is_zero():
        assert (a / b) * b == a


@given(gauss)
def test_norm_is_conjugate_product(a):
    assert a * a.conjugate() == GaussRational(a.norm2())
