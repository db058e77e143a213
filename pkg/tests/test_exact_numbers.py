from fractions import Fraction
import math

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from lattice_orbits.contfrac import (CFExpansion, ExpansionTerminated, cf_digits, convergents,
                                     cylinder, remainder_and_z, value_of)
from lattice_orbits.scalars import (GOLDEN, SILVER, QuadraticSurd, frac_part, number_from_json,
                                    number_to_json, parse_number, parse_surd, to_mpf)

unit_rationals = st.fractions(min_value=0, max_value=1).filter(lambda q: 0 < q < 1)
digit_lists = st.lists(st.integers(1, 40), min_size=1, max_size=12)


def naive_digits(x: Fraction, n: int) -> list[int]:
    """Euclid on numerator and denominator."""
    p, q = x.numerator, x.denominator
    out = []
    while p and len(out) < n:
        a, r = divmod(q, p)
        out.append(a)
        q, p = p, r
    return out


# -- surds --------------------------------------------------------------------

def test_surd_arithmetic_is_exact():
    s5 = QuadraticSurd.sqrt(5)
    assert s5 * s5 == 5
    assert GOLDEN * (GOLDEN + 1) == 1
    assert isinstance(GOLDEN - GOLDEN, Fraction)
    assert 1 / GOLDEN == GOLDEN + 1
    assert SILVER * (SILVER + 2) == 1


def test_surd_ordering_and_floor():
    assert 0 < GOLDEN < 1
    assert math.floor(QuadraticSurd.sqrt(2) * 100) == 141
    assert frac_part(QuadraticSurd.sqrt(2)) == SILVER


def test_surd_mpf_survives_cancellation():
    # a + b sqrt 2 with 70-bit coefficients and value near 1e-22
    v = QuadraticSurd.make(-11232456665282642295796, 7942546277405390632803, 1, 2)
    with mpmath.workprec(600):
        ref = mpmath.mpf(-11232456665282642295796) + 7942546277405390632803 * mpmath.sqrt(2)
    assert v.to_mpf(128) != 0
    assert abs(v.to_mpf(128) / ref - 1) < mpmath.mpf(2) ** -120


def test_parse_literals():
    assert parse_surd("sqrt5:-1:1:2") == GOLDEN
    assert parse_surd("sqrt5:-1:2") == GOLDEN
    assert parse_number("surd:phi") == GOLDEN
    assert parse_number("rational:2/5") == Fraction(2, 5)
    assert parse_number("3/7") == Fraction(3, 7)
    with pytest.raises(ValueError):
        parse_surd("sqrt5:1")


@pytest.mark.parametrize("v", [Fraction(-3, 7), GOLDEN, SILVER / 3, Fraction(0)])
def test_json_round_trip(v):
    assert number_from_json(number_to_json(v)) == v


# -- continued fractions ------------------------------------------------------

def test_golden_digits_are_ones():
    assert cf_digits(GOLDEN, 10) == [1] * 10
    assert cf_digits(SILVER, 6) == [2] * 6


def test_rational_terminates():
    assert cf_digits(Fraction(1, 3), 5) == [3]
    assert cf_digits(Fraction(2, 5), 10) == [2, 2]


@given(unit_rationals)
def test_digits_match_euclid(x):
    assert cf_digits(x, 50) == naive_digits(x, 50)


@given(digit_lists)
def test_value_of_inverts_digits(ds):
    if ds[-1] == 1 and len(ds) > 1:
        ds = ds[:-1] + [2]
    if ds == [1]:
        ds = [2]
    assert cf_digits(value_of(ds), len(ds) + 5) == ds


@given(digit_lists)
def test_convergent_determinant(ds):
    cs = convergents(ds)
    for a, b in zip(cs, cs[1:]):
        assert abs(a.numerator * b.denominator - a.denominator * b.numerator) == 1


def test_remainder_examples():
    assert remainder_and_z(Fraction(2, 5), 1) == (Fraction(5, 2), Fraction(1, 2))
    rho, z = remainder_and_z(GOLDEN, 3)
    assert rho == GOLDEN + 1 and z == GOLDEN
    with pytest.raises(ExpansionTerminated):
        remainder_and_z(Fraction(1, 2), 2)


def test_cylinder_endpoints():
    c = cylinder((1, 2))
    assert (c.left, c.right) == (Fraction(2, 3), Fraction(3, 4))
    assert c.left_closed and not c.right_closed
    assert c.sigma == Fraction(1, 3)
    odd = cylinder((2,))
    assert (odd.left, odd.right) == (Fraction(1, 3), Fraction(1, 2))
    assert not odd.left_closed and odd.right_closed


@given(unit_rationals, st.integers(1, 8))
def test_point_lies_in_its_cylinder(x, n):
    ds = cf_digits(x, n)
    c = cylinder(ds)
    assert c.contains(x)
    assert c.length == Fraction(1, c.q * (c.q + c.q_prev))


@settings(max_examples=60)
@given(st.lists(st.integers(1, 5), min_size=1, max_size=5), unit_rationals)
def test_sibling_cylinders_are_disjoint(ds, x):
    hits = [a for a in range(1, 400) if cylinder(tuple(ds) + (a,)).contains(x)]
    assert len(hits) <= 1
    if hits:
        assert cylinder(ds).contains(x)


def test_periodic_expansion_detected():
    e = CFExpansion.of(QuadraticSurd.sqrt(7) - 2)
    assert e.period is not None
    assert e.prefix(8) == naive_digits_of_surd(QuadraticSurd.sqrt(7) - 2, 8)
    assert e.max_digit() == 4


def naive_digits_of_surd(x, n):
    with mpmath.workprec(400):
        z = to_mpf(x, 400)
        out = []
        for _ in range(n):
            z = 1 / z
            a = int(mpmath.floor(z))
            out.append(a)
            z -= a
    return out
