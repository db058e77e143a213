from fractions import Fraction

import mpmath
import pytest

from lattice_orbits.contfrac import CFExpansion
from lattice_orbits.scalars import GOLDEN, SILVER, QuadraticSurd
from lattice_orbits.section import SectionPoint, gauss_T
from lattice_orbits.synthesis import (PlanError, Positions, align_target, block, chain_consistency,
                                      density, occupancy, synthesize, validate_positions,
                                      verify_limit_point)

PHI = SectionPoint(GOLDEN, GOLDEN, 1)


def test_cubic_positions():
    pos = Positions("cubic")
    assert [pos.m(k) for k in range(1, 5)] == [2, 16, 54, 128]
    assert pos.span(2) == (15, 18)
    assert pos.block_at(17) == (2, 2)
    assert pos.block_at(3) == (1, 1) and pos.block_at(5) is None


def test_position_validation():
    validate_positions([2, 16, 54])
    for bad in ([3, 16], [2, 4], [0, 16]):
        with pytest.raises(ValueError):
            validate_positions(bad)


def test_density_examples():
    assert density([2, 16, 54], 54) == Fraction(2 + 4, 54)
    assert density([2, 16, 54], 100) == Fraction(2 + 4 + 6, 100)
    # the occupancy counts partial blocks too
    assert occupancy([2, 16, 54], 16) == Fraction(2 + 2, 16)


def test_block_layout():
    b = CFExpansion.from_digits([1, 2, 3])
    c = CFExpansion.from_digits([4, 5, 6])
    assert block(b, c, 3) == (6, 5, 4, 1, 2, 3)


def test_alignment_is_one_T_step():
    aligned = align_target(SectionPoint(SILVER, Fraction(1, 3), 1))
    x, y = gauss_T(SILVER, Fraction(1, 3))
    assert (aligned.x, aligned.y, aligned.eps) == (x, y, -1)
    same = SectionPoint(SILVER, SILVER, -1)
    assert align_target(same) is same


def test_golden_stream_and_block_fidelity():
    sa = synthesize(PHI, L=2)
    assert sa.prefix(6) == [2, 1, 1, 1, 1, 1]
    for k in range(1, 6):
        b, c = sa.plan.b, sa.plan.c
        assert sa.read_block(k) == block(b, c, k)


def test_silver_target_blocks_and_digit_cap():
    sa = synthesize(SectionPoint(SILVER, SILVER, 1), L=2)
    assert sa.read_block(2) == (2, 2, 2, 2)
    assert max(sa.prefix(200)) <= max(sa.plan.L, sa.plan.M, 2)


def test_plan_rejections():
    with pytest.raises(PlanError):
        synthesize(SectionPoint(Fraction(1, 3), GOLDEN, 1))
    s7 = QuadraticSurd.sqrt(7) - 2                     # digits 1, 1, 1, 4, ...
    with pytest.raises(PlanError):
        synthesize(SectionPoint(s7, s7, -1), L=2)
    assert synthesize(SectionPoint(s7, s7, -1), L=4).plan.M == 4


def test_limit_point_distances_decay():
    sa = synthesize(PHI, L=2)
    rep = verify_limit_point(sa, 5)
    d = [c.distance for c in rep.checkpoints]
    assert d[0] > d[1] > d[2]
    assert rep.passed and rep.envelope_ok


def test_mismatched_target_plateaus():
    sa = synthesize(PHI, L=2)
    rep = verify_limit_point(sa, 5, target=SectionPoint(GOLDEN, SILVER, -1))
    assert min(c.distance for c in rep.checkpoints) > 0.1
    assert not rep.passed


def test_chain_reproduces_digit_reversal():
    sa = synthesize(PHI, L=2)
    cc = chain_consistency(sa, 3)
    assert cc.ok and cc.checked == 55


def test_truncated_convergent_to_mpf():
    sa = synthesize(PHI, L=2)
    with mpmath.workprec(200):
        assert abs(sa.to_mpf(200) - 1 / (2 + GOLDEN.to_mpf(200))) < mpmath.mpf(2) ** -190
