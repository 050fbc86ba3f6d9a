from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from probpga.meadow import (
    Add, Div, ExpressionError, Inv, Mul, Neg, Numeral, One, PowNat, Signum, Sub, Zero,
    as_natural, evaluate, format_rational, format_short, minv, mkprob, numeral,
    parse_expression, parse_rational, power, rmax, rmin, signum,
)

rationals = st.fractions(
    min_value=-10**6, max_value=10**6, max_denominator=10**6
)


def test_inverse_of_zero_is_zero():
    assert minv(Fraction(0)) == 0
    assert evaluate(Inv(Zero())) == 0


@pytest.mark.parametrize("x, expected", [
    (Fraction(2, 3), Fraction(3, 2)),
    (Fraction(-4), Fraction(-1, 4)),
    (Fraction(0), Fraction(0)),
])
def test_minv(x, expected):
    assert minv(x) == expected


@pytest.mark.parametrize("x, expected", [(Fraction(7, 2), 1), (Fraction(0), 0), (Fraction(-1, 9), -1)])
def test_signum(x, expected):
    assert signum(x) == expected


def test_min_max_examples():
    assert rmin(Fraction(1), Fraction(2, 3)) == Fraction(2, 3)
    assert rmax(Fraction(0), Fraction(-1)) == 0


@pytest.mark.parametrize("q, expected", [
    (Fraction(2, 3), Fraction(2, 3)), (Fraction(-1), 0), (Fraction(3, 2), 1),
])
def test_mkprob(q, expected):
    assert mkprob(q) == expected


@pytest.mark.parametrize("q, expected", [(Fraction(3), 3), (Fraction(2, 3), None), (Fraction(-2), None), (Fraction(0), 0)])
def test_as_natural(q, expected):
    assert as_natural(q) == expected


def test_numerals():
    assert [numeral(n) for n in range(4)] == [0, 1, 2, 3]
    with pytest.raises(ValueError):
        numeral(-1)


def test_evaluate_sugar():
    assert evaluate(Div(Numeral(2), Numeral(3))) == Fraction(2, 3)
    assert evaluate(Signum(Neg(Numeral(5)))) == -1
    assert evaluate(Sub(One(), PowNat(Div(One(), Numeral(2)), 3))) == Fraction(7, 8)
    assert evaluate(Div(One(), Zero())) == 0
    assert evaluate(Mul(Add(One(), One()), Inv(Numeral(4)))) == Fraction(1, 2)


def test_power():
    assert power(Fraction(1, 2), 0) == 1
    assert power(Fraction(-2, 3), 3) == Fraction(-8, 27)
    with pytest.raises(ValueError):
        power(Fraction(2), -1)


def test_formatting():
    assert format_rational(Fraction(1)) == "1/1"
    assert format_rational(Fraction(-2, 4)) == "-1/2"
    assert format_short(Fraction(3)) == "3"
    assert format_short(Fraction(2, 3)) == "2/3"


@pytest.mark.parametrize("text, value", [
    ("2/3", Fraction(2, 3)),
    ("1 - 1/3", Fraction(2, 3)),
    ("(1/2)^3", Fraction(1, 8)),
    ("-2^2", Fraction(-4)),
    ("1/0", Fraction(0)),
    ("inv(0) + sgn(-7/2)", Fraction(-1)),
    ("2*3 - 4/8", Fraction(11, 2)),
])
def test_parse_rational(text, value):
    assert parse_rational(text) == value


@pytest.mark.parametrize("text", ["sqrt(2)", "pi", "1 +", "2^(1/2)", "2^-1", "x"])
def test_parse_rational_rejects(text):
    with pytest.raises(ExpressionError):
        parse_rational(text)


def test_irrational_message():
    with pytest.raises(ExpressionError, match="irrational"):
        parse_expression("sqrt(1+1)")


@given(rationals, rationals, rationals)
def test_field_laws(x, y, z):
    assert x + y == y + x and x * y == y * x
    assert (x + y) + z == x + (y + z) and (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert -(-x) == x and x + 0 == x and x * 1 == x


@given(rationals, rationals)
def test_meadow_laws(x, y):
    assert minv(minv(x)) == x
    assert x * (x * minv(x)) == x
    assert signum(x * y) == signum(x) * signum(y)
    assert (rmax(x, y) == x) == (signum(x - y) in (0, 1))
    assert rmin(x, y) + rmax(x, y) == x + y


@given(rationals, rationals)
def test_mkprob_laws(x, y):
    assert 0 <= mkprob(x) <= 1
    assert mkprob(mkprob(x)) == mkprob(x)
    if x <= y:
        assert mkprob(x) <= mkprob(y)


@given(st.integers(min_value=0, max_value=10**9))
def test_numeral_round_trip(n):
    assert as_natural(numeral(n)) == n
