from fractions import Fraction
import math

import pytest

from lattice_orbits.contfrac import CFExpansion, cylinder
from lattice_orbits.dimension import (FORCED_B, FORCED_C, FREE, asymptotic_bound, audit_family,
                                      conditional_band, conditional_tail, dim_lower_bound,
                                      index_counts, level_case, theta_bounds)
from lattice_orbits.scalars import GOLDEN
from lattice_orbits.synthesis import Positions


def test_conditional_examples():
    assert conditional_tail((1,), Fraction(1, 2)) == Fraction(1, 3)
    assert conditional_band((1,), Fraction(1, 3), Fraction(1, 2)) == Fraction(1, 6)
    assert conditional_band((2,), Fraction(1, 4), Fraction(1, 2)) == Fraction(4, 15)
    assert conditional_tail((3, 1), 0) == 1 and conditional_tail((3, 1), 1) == 0
    with pytest.raises(ValueError):
        conditional_band((1,), Fraction(1, 2), Fraction(1, 3))


def test_digit_band_equals_child_cylinder():
    # z_n in [1/(a+1), 1/a] is exactly the closure of the child cylinder with digit a
    for k in [(1,), (2, 3), (1, 1, 4)]:
        parent = cylinder(k)
        for a in range(2, 6):
            child = cylinder(k + (a,))
            assert conditional_band(k, Fraction(1, a + 1), Fraction(1, a)) == child.length / parent.length


def test_asymptotic_value():
    assert abs(asymptotic_bound(10) - (1 - math.log(1.2) / math.log(2))) < 1e-15
    assert abs(asymptotic_bound(10) - 0.7369655941662062) < 1e-12


def test_level_cases():
    pos = Positions([2, 16, 54])
    assert level_case(0, pos)[0] == "first-digit"
    assert level_case(1, pos) == (FORCED_C, 1, 0)      # position 2 = m_1
    assert level_case(2, pos) == (FORCED_B, 1, 1)      # position 3 = m_1 + 1
    assert level_case(3, pos)[0] == FREE
    assert theta_bounds(3, 10, 1, pos) == (Fraction(10, 12), FREE)
    assert theta_bounds(1, 10, 1, pos)[0] == Fraction(1, 16)
    with pytest.raises(ValueError):
        theta_bounds(3, 1, 1, pos)


def test_index_counts_partition():
    pos = Positions("cubic")
    for m in (1, 5, 20, 60, 130):
        nI, nJ = index_counts(m, pos)
        assert nI + nJ == m - 1
        assert nJ == sum(1 for j in range(1, m) if pos.block_at(j + 1) is not None)


def test_finite_curve_approaches_from_below():
    rep = dim_lower_bound(10, 1, "cubic", 200)
    assert all(row["value"] <= rep.asymptotic + 1e-12 for row in rep.curve if row["m"] > 1)
    assert rep.running_max < rep.asymptotic
    assert rep.to_csv().splitlines()[0].startswith("m,I_m,J_m")


def test_finite_positions_need_room():
    with pytest.raises(ValueError):
        dim_lower_bound(2, 1, [2, 16, 54], m_max=50)


def test_audit_small_free_family():
    rep = audit_family(3, 1, m_max=5)
    assert rep.certified
    assert rep.families[1] == [(Fraction(1, 3), Fraction(1, 2))]
    assert all(a.theta_hat_min >= Fraction(3, 5) for a in rep.levels[1:])
    assert [a.count for a in rep.levels] == [1, 1, 3, 9, 27, 81]


def test_audit_blocked_family():
    phi = CFExpansion.of(GOLDEN)
    rep = audit_family(2, 1, (phi, phi), [2, 16, 54], m_max=20, keep_families=False)
    assert rep.certified
    forced = [a for a in rep.levels if a.tag in (FORCED_B, FORCED_C)]
    assert forced and all(a.theta_hat_min >= Fraction(1, 16) for a in forced)


def test_audit_requires_blocks_inside_range():
    with pytest.raises(ValueError):
        audit_family(3, 1, None, [2, 16], m_max=5)


def test_blocked_curve_closed_form():
    # m = 100, blocks at 2, 16, 54: 12 forced and 87 free levels among j = 1..99
    rep = dim_lower_bound(2, 1, [2, 16, 54], m_max=100)
    row = rep.curve[-1]
    assert (row["I"], row["J"]) == (87, 12)
    expected = 1 + (87 * math.log(2 / 4) - 12 * math.log(16)) / (100 * math.log(2))
    assert abs(row["value"] - expected) < 1e-12
    assert abs(expected - (-0.35)) < 1e-12
    assert rep.asymptotic == 0.0


@pytest.mark.parametrize("L,M,positions", [(10, 1, "cubic"), (2, 1, [2, 16, 54]), (5, 3, "cubic")])
def test_curve_gap_is_controlled_by_block_occupancy(L, M, positions):
    rep = dim_lower_bound(L, M, positions, m_max=200)
    slope = math.log(4 * (M + 1) ** 2) / math.log(2)
    for row in rep.curve:
        assert row["value"] >= rep.asymptotic - slope * row["occupancy"] - 1e-12


def test_asymptotic_increases_with_L():
    vals = [asymptotic_bound(L) for L in range(2, 60)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert vals[-1] > 0.95
