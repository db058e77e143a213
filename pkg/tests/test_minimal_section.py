from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from lattice_orbits.flow import PlanarLattice, lattice_from_alpha
from lattice_orbits.scalars import GOLDEN, SILVER, QuadraticSurd
from lattice_orbits.section import (AxisReached, DomainError, SectionPoint, chain, check_pair,
                                    gauss_S, gauss_T, in_U, initial_pair, is_minimal,
                                    lattice_points_in_box, next_minimal, precompact_test,
                                    reconstruct_lattice, section_coords)

interior = st.fractions(min_value=0, max_value=1, max_denominator=10 ** 6).filter(lambda q: 0 < q < 1)


def brute_box(lattice, a, b, bound=40):
    (p, q), (r, s) = lattice.basis
    out = set()
    for i in range(-bound, bound + 1):
        for j in range(-bound, bound + 1):
            w = (p * i + q * j, r * i + s * j)
            if (i or j) and abs(w[0]) <= a and abs(w[1]) <= b:
                out.add(w)
    return out


def test_domain():
    assert in_U(Fraction(1, 2), 0) and in_U(0, Fraction(1, 2))
    assert not in_U(Fraction(3, 4), 0)
    assert not in_U(1, Fraction(1, 2))
    with pytest.raises(DomainError):
        gauss_T(Fraction(3, 4), 0)


def test_map_examples():
    assert tuple(gauss_T(Fraction(2, 5), Fraction(1, 3))) == (Fraction(1, 2), Fraction(3, 7))
    assert tuple(gauss_T(GOLDEN, GOLDEN)) == (GOLDEN, GOLDEN)
    img = gauss_T(Fraction(1, 3), Fraction(1, 2))
    assert img.boundary and img[0] == 0


@given(interior, interior)
def test_T_and_S_are_inverse(x, y):
    assert tuple(gauss_S(*gauss_T(x, y))) == (x, y)
    assert tuple(gauss_T(*gauss_S(x, y))) == (x, y)
    assert in_U(*gauss_T(x, y))


@pytest.mark.parametrize("a,b", [(Fraction(3, 2), Fraction(2)), (Fraction(1, 10), Fraction(7)),
                                 (Fraction(5), Fraction(1, 3)), (Fraction(2), Fraction(0))])
def test_box_enumeration_is_complete(a, b):
    lat = lattice_from_alpha(Fraction(3, 7))
    got = {w for _, w in lattice_points_in_box(lat, a, b)}
    assert got == brute_box(lat, a, b)


def test_minimality_on_the_standard_lattice():
    Z = PlanarLattice.standard()
    assert is_minimal(Z, (1, 0)) and is_minimal(Z, (0, 1))
    assert not is_minimal(Z, (1, 1))
    assert not is_minimal(Z, (2, 0))
    with pytest.raises(ValueError):
        is_minimal(Z, (Fraction(1, 2), 0))


def test_initial_pairs():
    p = initial_pair(lattice_from_alpha(Fraction(2, 5)))
    assert (p.r, p.s) == ((-1, 0), (Fraction(2, 5), 1))
    sp = section_coords(p)
    assert (sp.x, sp.y, sp.eps) == (Fraction(2, 5), 0, -1)
    p = initial_pair(lattice_from_alpha(GOLDEN))
    assert (p.r, p.s) == ((1, 0), (GOLDEN - 1, 1))
    assert check_pair(p) == []


def test_next_pair_example():
    lat, p = reconstruct_lattice(SectionPoint(Fraction(2, 5), Fraction(1, 3), 1))
    sp = section_coords(next_minimal(p))
    assert (sp.x, sp.y, sp.eps) == (Fraction(1, 2), Fraction(3, 7), -1)


@settings(max_examples=30, deadline=None)
@given(interior, interior, st.sampled_from([1, -1]))
def test_reconstruct_round_trip(x, y, eps):
    lat, p = reconstruct_lattice(SectionPoint(x, y, eps))
    sp = section_coords(p)
    assert (sp.x, sp.y, sp.eps) == (x, y, eps)
    assert check_pair(p) == []


def test_chain_on_surd_lattice_keeps_invariants():
    lat, p = reconstruct_lattice(SectionPoint(GOLDEN, GOLDEN, 1))
    pairs = chain(p, 12)
    assert len(pairs) == 13
    for q in pairs:
        assert check_pair(q) == []
        sp = section_coords(q)
        assert (sp.x, sp.y) == (GOLDEN, GOLDEN)


def test_rational_chain_reaches_the_axis():
    lat, p = reconstruct_lattice(SectionPoint(Fraction(5, 13), Fraction(1, 4), 1))
    pairs = chain(p, 50)
    assert pairs[-1].terminal
    with pytest.raises(AxisReached):
        next_minimal(pairs[-1])


def test_precompact_verdicts():
    lat, _ = reconstruct_lattice(SectionPoint(SILVER, SILVER, 1))
    rep = precompact_test(lat, 100)
    assert rep.certified and rep.max_digit_x == 2 and rep.max_digit_y == 2
    # Lambda_phi holds (1, 0), so its orbit escapes in negative time
    assert not precompact_test(lattice_from_alpha(GOLDEN)).certified
    assert precompact_test(lattice_from_alpha(Fraction(2, 5))).verdict.startswith("divergent")


def test_surd_pair_coordinates_stay_in_field():
    s3 = QuadraticSurd.sqrt(3)
    x = s3 - 1 - Fraction(1, 2)            # sqrt3 - 3/2 in (0, 1)
    lat, p = reconstruct_lattice(SectionPoint(x, Fraction(1, 3), -1))
    for q in chain(p, 8):
        assert check_pair(q) == []
