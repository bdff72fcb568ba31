from fractions import Fraction

import pytest

from column_number import intervals
from column_number.errors import PreconditionError
from column_number.intervals import Enclosure, certify_ge, certify_le, fraction_str, parse_fraction


def test_exact_arithmetic_stays_exact():
    a = Enclosure.exact(1)

    out = (a + Fraction(1, 2)) * 2 - 1

    assert out == Enclosure.exact(2)


def test_product_of_mixed_signs_takes_extremes():
    x = Enclosure(Fraction(-1), Fraction(2))
    y = Enclosure(Fraction(3), Fraction(4))

    out = x * y

    assert out == Enclosure(Fraction(-4), Fraction(8))


def test_reciprocal_across_zero_is_rejected():
    with pytest.raises(PreconditionError):
        Enclosure(Fraction(-1), Fraction(1)).reciprocal()


def test_inverted_enclosure_is_rejected():
    with pytest.raises(PreconditionError):
        Enclosure.from_strings("2", "1")


def test_log_two_is_tightly_enclosed():
    out = intervals.log(2)

    assert out.lo > Fraction("0.6931471805599453094")
    assert out.hi < Fraction("0.6931471805599453095")


def test_sqrt_two_brackets_exactly():
    out = intervals.sqrt(2)

    assert out.lo * out.lo <= 2 <= out.hi * out.hi


def test_sqrt_of_square_contains_root():
    assert intervals.sqrt(Fraction(9, 4)).contains(Fraction(3, 2))


def test_root4_matches_nested_sqrt():
    out = intervals.root4(16)

    assert out.contains(2)
    assert out.width < Fraction(1, 10**20)


def test_certify_le_decides_both_ways():
    assert certify_le(lambda p: intervals.log(3, p), Fraction(11, 10))
    assert not certify_le(lambda p: intervals.log(3, p), 1)


def test_certify_ge_mirrors_certify_le():
    assert certify_ge(lambda p: intervals.sqrt(2, p), Fraction(141, 100))
    assert not certify_ge(lambda p: intervals.sqrt(2, p), Fraction(142, 100))


def test_fraction_strings():
    assert fraction_str(3) == "3/1"
    assert fraction_str(Fraction(-2, 4)) == "-1/2"
    assert parse_fraction("0.999") == Fraction(999, 1000)
    assert parse_fraction(" 37/20 ") == Fraction(37, 20)
    with pytest.raises(PreconditionError):
        parse_fraction("abc")
