from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lattice_orbits.flow import (GroupElement, PlanarLattice, act, gauss_reduce, lambda1_batch,
                                 lattice_from_alpha, orbit_min_scan, samples_from_csv,
                                 samples_to_csv, shortest_vector)
from lattice_orbits.norms import EuclideanNorm, SupNorm
from lattice_orbits.scalars import GOLDEN, SILVER


def brute_lambda1(basis, norm, bound=80):
    (a, b), (c, d) = [[float(e) for e in row] for row in basis]
    i, j = np.meshgrid(np.arange(-bound, bound + 1), np.arange(-bound, bound + 1))
    keep = (i != 0) | (j != 0)
    i, j = i[keep], j[keep]
    pts = np.stack([a * i + b * j, c * i + d * j], axis=-1)
    return float(np.min(norm.batch(pts)))


def test_group_relations():
    x, y, t = Fraction(1, 3), Fraction(2, 7), mpmath.mpf("0.7")
    assert (GroupElement.upper(x) @ GroupElement.upper(-x)).matrix == GroupElement.identity().matrix
    # g_t u_x g_-t = u_{e^{2t} x}
    lhs = GroupElement.flow(t) @ GroupElement.upper(x) @ GroupElement.flow(-t)
    rhs = GroupElement.upper(mpmath.exp(2 * t) * x)
    assert max(abs(lhs.matrix[i][j] - rhs.matrix[i][j]) for i in range(2) for j in range(2)) < 1e-60
    lhs = GroupElement.flow(t) @ GroupElement.lower(y) @ GroupElement.flow(-t)
    rhs = GroupElement.lower(mpmath.exp(-2 * t) * y)
    assert max(abs(lhs.matrix[i][j] - rhs.matrix[i][j]) for i in range(2) for j in range(2)) < 1e-60


def test_lattice_orientation_and_membership():
    L = PlanarLattice(((0, 1), (1, 0)), "swap")
    assert "oriented" in L.provenance
    lam = lattice_from_alpha(Fraction(2, 5))
    assert lam.contains((Fraction(2, 5), 1)) and lam.contains((Fraction(-3, 5), 1))
    assert not lam.contains((Fraction(1, 5), 1))
    with pytest.raises(ValueError):
        PlanarLattice(((2, 0), (0, 1)), "bad")


@settings(max_examples=40, deadline=None)
@given(st.fractions(min_value=-3, max_value=3), st.integers(-4, 4), st.integers(-4, 4))
def test_gauss_reduce_is_unimodular_and_reduced(x, i, j):
    u, v = (1 + i * float(x), float(i)), (float(x) + j, 1.0 + j)
    if abs(u[0] * v[1] - u[1] * v[0]) < 1e-9:
        return
    ru, rv, C = gauss_reduce(u, v)
    assert abs(C[0][0] * C[1][1] - C[0][1] * C[1][0]) == 1
    assert 2 * abs(ru[0] * rv[0] + ru[1] * rv[1]) <= ru[0] ** 2 + ru[1] ** 2 + 1e-12


@pytest.mark.parametrize("alpha", [GOLDEN, SILVER, Fraction(3, 11)])
@pytest.mark.parametrize("t", ["0", "1.3", "4.1"])
def test_shortest_vector_matches_brute_force(alpha, t):
    lat = act(GroupElement.flow(mpmath.mpf(t)), lattice_from_alpha(alpha))
    for norm in (SupNorm(), EuclideanNorm()):
        sv = shortest_vector(lat, norm)
        assert abs(float(sv.value) - brute_lambda1(lat.basis, norm)) < 1e-12


def test_lambda1_batch_agrees_with_scalar():
    rng = np.random.default_rng(0)
    bases = []
    for _ in range(50):
        x, t = rng.uniform(0, 1), rng.uniform(0, 3)
        bases.append([[np.exp(t), np.exp(t) * x], [0, np.exp(-t)]])
    vals, _ = lambda1_batch(np.array(bases), SupNorm())
    for B, v in zip(bases, vals):
        assert abs(v - brute_lambda1(B, SupNorm())) < 1e-12


def test_golden_scan_finds_the_q1_return():
    scan = orbit_min_scan(lattice_from_alpha(GOLDEN), SupNorm(), 0, 20, Fraction(1, 1000))
    # the q = 1 vector balances at t = log(1/(1 - phi))/2 with lambda_1^2 = 1 - phi
    assert abs(float(scan.inf) ** 2 - float(1 - GOLDEN)) < 1e-10
    assert not scan.divergence_suspected


def test_golden_tail_inf_is_hurwitz_constant():
    # away from the first return the infimum is governed by q ||q phi|| -> 1/sqrt5
    scan = orbit_min_scan(lattice_from_alpha(GOLDEN), SupNorm(), 5, 20, Fraction(1, 1000))
    assert abs(float(scan.inf) ** 2 - 5 ** -0.5) < 1e-2


def test_rational_orbit_diverges():
    scan = orbit_min_scan(lattice_from_alpha(Fraction(2, 5)), SupNorm(), 0, 20, Fraction(1, 100))
    assert scan.divergence_suspected


def test_csv_round_trip():
    scan = orbit_min_scan(lattice_from_alpha(GOLDEN), SupNorm(), 0, 1, Fraction(1, 10), refine=0)
    back = samples_from_csv(samples_to_csv(scan.samples))
    assert len(back) == len(scan.samples)
    assert all(abs(a.lambda1 - b.lambda1) < 1e-50 for a, b in zip(back, scan.samples))
