"""Minimal vectors, consecutive pairs, intrinsic coordinates (x, y, eps) and the
maps T and S on the domain U. Chains are built from integer column operations
on exact bases, so every section point stays exact."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import mpmath

from .contfrac import CFExpansion
from .flow import PlanarLattice, gauss_reduce
from .scalars import QuadraticSurd, is_exact, number_to_json, sign, to_mpf

HALF = Fraction(1, 2)


class DomainError(ValueError):
    pass


class AxisReached(ValueError):
    """The chain hit a pair with s_1 = 0 (the lattice has a vertical vector)."""


# -- U, T and S ---------------------------------------------------------------

def in_U(x, y) -> bool:
    """U = (0,1)^2 u ([0,1/2] x {0}) u ({0} x [0,1/2])."""
    if 0 < x < 1 and 0 < y < 1:
        return True
    if y == 0 and 0 <= x <= HALF:
        return True
    return x == 0 and 0 <= y <= HALF


class SectionImage(tuple):
    """An (x, y) pair that also records whether it landed on the boundary of U."""

    def __new__(cls, x, y, boundary: bool):
        obj = super().__new__(cls, (x, y))
        obj.boundary = boundary
        return obj


def _num(v):
    return Fraction(v) if isinstance(v, int) else v


def gauss_T(x, y) -> SectionImage:
    """T(x, y) = ({1/x}, 1/(floor(1/x) + y)) on (0,1)^2 u ((0,1/2] x {0})."""
    x, y = _num(x), _num(y)
    if not ((0 < x < 1 and 0 < y < 1) or (y == 0 and 0 < x <= HALF)):
        raise DomainError(f"({x}, {y}) is outside the domain of T")
    rho = 1 / x
    n = math.floor(rho)
    a = rho - n
    return SectionImage(a, 1 / (n + y), a == 0)


def gauss_S(a, b) -> SectionImage:
    """S(a, b) = (1/(a + floor(1/b)), {1/b}) on (0,1)^2 u ({0} x (0,1/2])."""
    a, b = _num(a), _num(b)
    if not ((0 < a < 1 and 0 < b < 1) or (a == 0 and 0 < b <= HALF)):
        raise DomainError(f"({a}, {b}) is outside the domain of S")
    rho = 1 / b
    n = math.floor(rho)
    y = rho - n
    return SectionImage(1 / (a + n), y, y == 0)


# -- lattice points in boxes --------------------------------------------------

def _inverse(B):
    (a, b), (c, d) = B
    det = a * d - b * c
    return ((d / det, -b / det), (-c / det, a / det))


def coefficient_bound(basis, a, b) -> int:
    """Largest |i| or |j| of a point B(i, j) in the box |w_1| <= a, |w_2| <= b.

    With B^{-1} = [[p, q], [r, s]] every such point has |i| <= |p| a + |q| b and
    |j| <= |r| a + |s| b.
    """
    (p, q), (r, s) = _inverse(basis)
    return max(math.floor(abs(p) * a + abs(q) * b), math.floor(abs(r) * a + abs(s) * b))


def _adapted_change(basis, a, b):
    """Integer C making B C nearly orthogonal after scaling the box to a square."""
    # the box aspect ratio and the basis spread both eat working precision
    spread = [abs(mpmath.log(to_mpf(abs(e), 64), 2)) for e in (a, b) + tuple(c for row in basis for c in row) if e != 0]
    prec = 128 + 2 * int(sum(spread))
    with mpmath.workprec(prec):
        (p, q), (r, s) = basis
        sa, sb = 1 / to_mpf(a, prec), 1 / to_mpf(b, prec)
        u = (to_mpf(p, prec) * sa, to_mpf(r, prec) * sb)
        v = (to_mpf(q, prec) * sa, to_mpf(s, prec) * sb)
        _, _, C = gauss_reduce(u, v)
    return C


def _times(B, C):
    (p, q), (r, s) = B
    return ((p * C[0][0] + q * C[1][0], p * C[0][1] + q * C[1][1]),
            (r * C[0][0] + s * C[1][0], r * C[0][1] + s * C[1][1]))


def lattice_points_in_box(lattice: PlanarLattice, a, b) -> Iterator[tuple[tuple[int, int], tuple]]:
    """All nonzero points w of the lattice with |w_1| <= a and |w_2| <= b, as
    ((i, j) in the lattice's basis, w). Complete: enumeration runs over a
    reduced basis of the box-scaled lattice with an exact coefficient bound."""
    if a < 0 or b < 0:
        raise ValueError("box half-sides must be non-negative")
    if a == 0 and b == 0:
        return iter(())
    if a == 0 or b == 0:
        # degenerate box: search a thin box and keep the points on the axis
        thin = 1 / (1 + a + b)
        pts = lattice_points_in_box(lattice, a or thin, b or thin)
        return ((ij, w) for ij, w in pts if abs(w[0]) <= a and abs(w[1]) <= b)
    B = lattice.basis
    C = _adapted_change(B, a, b)
    Bp = _times(B, C)
    (p, q), (r, s) = _inverse(Bp)
    ni = math.floor(abs(p) * a + abs(q) * b)
    nj = math.floor(abs(r) * a + abs(s) * b)

    def gen():
        for i in range(-ni, ni + 1):
            for j in range(-nj, nj + 1):
                if i == 0 and j == 0:
                    continue
                w1 = Bp[0][0] * i + Bp[0][1] * j
                if abs(w1) > a:
                    continue
                w2 = Bp[1][0] * i + Bp[1][1] * j
                if abs(w2) > b:
                    continue
                yield (C[0][0] * i + C[0][1] * j, C[1][0] * i + C[1][1] * j), (w1, w2)
    return gen()


def lattice_coordinates(lattice: PlanarLattice, v) -> tuple[int, int]:
    i, j = lattice.coordinates(v)
    out = []
    for z in (i, j):
        if isinstance(z, QuadraticSurd) or (is_exact(z) and Fraction(z).denominator != 1):
            raise ValueError(f"{v} is not a lattice vector")
        if not is_exact(z):
            k = int(mpmath.nint(z))
            if abs(z - k) > mpmath.mpf(2) ** -40:
                raise ValueError(f"{v} is not a lattice vector")
            z = k
        out.append(int(z))
    return out[0], out[1]


def is_minimal(lattice: PlanarLattice, v, search_bound: int | None = None) -> bool:
    """True iff every nonzero lattice point of R(|v_1|, |v_2|) has |w_1| = |v_1|
    and |w_2| = |v_2|.

    ``search_bound``, when given, is checked against the coefficient bound of
    the lattice's own basis (it must dominate it); the search itself runs over
    a box-adapted basis and is always complete.
    """
    lattice_coordinates(lattice, v)
    if v[0] == 0 and v[1] == 0:
        raise ValueError("the zero vector is never minimal")
    a, b = abs(v[0]), abs(v[1])
    if search_bound is not None:
        need = coefficient_bound(lattice.basis, a, b)
        if search_bound < need:
            raise ValueError(f"search bound {search_bound} is below the coefficient bound {need}")
    for _, w in lattice_points_in_box(lattice, a, b):
        if abs(w[0]) != a or abs(w[1]) != b:
            return False
    return True


def interior_points(lattice: PlanarLattice, a, b) -> list:
    """Nonzero lattice points strictly inside R(a, b)."""
    return [w for _, w in lattice_points_in_box(lattice, a, b) if abs(w[0]) < a and abs(w[1]) < b]


# -- pairs and section points -------------------------------------------------

@dataclass(frozen=True)
class SectionPoint:
    x: object
    y: object
    eps: int

    def __post_init__(self):
        if self.eps not in (1, -1):
            raise ValueError("eps must be +1 or -1")

    @property
    def in_U(self) -> bool:
        return in_U(self.x, self.y)

    @property
    def terminal(self) -> bool:
        return self.x == 0

    def to_json(self) -> dict:
        return {"x": number_to_json(self.x), "y": number_to_json(self.y), "eps": self.eps}


@dataclass(frozen=True)
class MinimalPair:
    r: tuple
    s: tuple
    host: PlanarLattice | None = None

    @property
    def terminal(self) -> bool:
        """s_1 = 0: no forward continuation (vertical lattice vector)."""
        return self.s[0] == 0

    def basis(self):
        return ((self.r[0], self.s[0]), (self.r[1], self.s[1]))


def _normalize_sign(r, s):
    if r[1] == 0 and sign(r[0]) * sign(s[0]) > 0:
        r = (-r[0], -r[1])
    return r


def _upper(w):
    """Representative of +-w with w_2 > 0, or w_1 > 0 when w_2 = 0."""
    if w[1] < 0 or (w[1] == 0 and w[0] < 0):
        return (-w[0], -w[1])
    return w


def initial_pair(lattice: PlanarLattice, height=1) -> MinimalPair:
    """The consecutive pair straddling ``height``: r minimizes (|w_1|, |w_2|)
    over |w_2| < height, and s minimizes (|w_2|, |w_1|, -w_1) over the strip
    |w_1| < |r_1|. Signs follow 0 <= r_2 < s_2 and the rule for r_2 = 0.

    For Lambda_alpha with alpha in (0, 1) this gives ((-1, 0), (alpha, 1)) when
    alpha <= 1/2 and ((1, 0), (alpha - 1, 1)) otherwise.
    """
    h = Fraction(height) if isinstance(height, int) else height
    # Minkowski: the box |w_1| <= 2/h, |w_2| < h holds a nonzero point.
    cands = [w for _, w in lattice_points_in_box(lattice, 2 / h, h) if abs(w[1]) < h]
    if not cands:
        raise ValueError("no lattice point found below the requested height")
    r = _upper(min(cands, key=lambda w: (abs(w[0]), abs(w[1]), -_upper(w)[0])))
    a = abs(r[0])
    if a == 0:
        raise ValueError("lattice has a vertical vector below the height; no pair straddles it")
    strip = [w for _, w in lattice_points_in_box(lattice, a, 2 / a) if abs(w[0]) < a]
    if not strip:
        raise ValueError("no lattice point in the strip above r")
    s = _upper(min(strip, key=lambda w: (abs(w[1]), abs(w[0]), -_upper(w)[0])))
    r = _normalize_sign(r, s)
    return MinimalPair(r, s, lattice)


def section_coords(p: MinimalPair) -> SectionPoint:
    """(x, y, eps) = (-s_1/r_1, r_2/s_2, sign r_1)."""
    r, s = p.r, p.s
    if r[0] == 0:
        raise ValueError("r_1 = 0 cannot occur for a consecutive minimal pair")
    return SectionPoint(-s[0] / r[0], r[1] / s[1], sign(r[0]))


def next_minimal(p: MinimalPair) -> MinimalPair:
    """(r, s) -> (s, r + n s) with n = floor(1/x)."""
    if p.terminal:
        raise AxisReached("axis reached: s_1 = 0, the chain has no continuation")
    x = -p.s[0] / p.r[0]
    n = math.floor(1 / x)
    w = (p.r[0] + n * p.s[0], p.r[1] + n * p.s[1])
    return MinimalPair(p.s, w, p.host)


def chain(p: MinimalPair, depth: int) -> list[MinimalPair]:
    """p followed by up to ``depth`` successors (stops early at a terminal pair)."""
    out = [p]
    for _ in range(depth):
        if out[-1].terminal:
            break
        out.append(next_minimal(out[-1]))
    return out


def check_pair(p: MinimalPair) -> list[str]:
    """Exact audit of the pair invariants; returns the list of violations."""
    bad = []
    r, s, host = p.r, p.s, p.host
    if not (0 <= r[1] < s[1]):
        bad.append("ordering 0 <= r_2 < s_2")
    if r[1] == 0 and sign(r[0]) * sign(s[0]) > 0:
        bad.append("sign rule for r_2 = 0")
    if host is not None:
        if not is_minimal(host, r):
            bad.append("r not minimal")
        if not is_minimal(host, s):
            bad.append("s not minimal")
        if interior_points(host, abs(r[0]), abs(s[1])):
            bad.append("lattice point inside R(|r_1|, |s_2|)")
        i1, j1 = lattice_coordinates(host, r)
        i2, j2 = lattice_coordinates(host, s)
        if abs(i1 * j2 - i2 * j1) != 1:
            bad.append("(r, s) is not a basis")
    if r[0] != 0 and not in_U(-s[0] / r[0], r[1] / s[1]):
        bad.append("coordinates outside U")
    return bad


def reconstruct_lattice(sp: SectionPoint) -> tuple[PlanarLattice, MinimalPair]:
    """Lattice with intrinsic basis [[eps, -eps x], [y/(1+xy), 1/(1+xy)]] and its pair."""
    if not in_U(sp.x, sp.y):
        raise DomainError(f"({sp.x}, {sp.y}) is outside U")
    x, y, e = sp.x, sp.y, sp.eps
    if is_exact(x) and is_exact(y):
        x, y = Fraction(x) if isinstance(x, int) else x, Fraction(y) if isinstance(y, int) else y
    one = 1 + x * y
    r = (Fraction(e) if is_exact(x) else mpmath.mpf(e), y / one)
    s = (-e * x, 1 / one)
    lattice = PlanarLattice(((r[0], s[0]), (r[1], s[1])), "reconstructed")
    return lattice, MinimalPair(r, s, lattice)


# -- precompactness -----------------------------------------------------------

@dataclass
class PrecompactReport:
    verdict: str
    max_digit_x: int | None
    max_digit_y: int | None
    digits_x: list[int]
    digits_y: list[int]
    period_x: tuple[int, int] | None = None
    period_y: tuple[int, int] | None = None

    @property
    def certified(self) -> bool:
        return self.verdict == "precompact certified to depth"

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "max_digit_x": self.max_digit_x,
                "max_digit_y": self.max_digit_y, "digits_x": self.digits_x,
                "digits_y": self.digits_y, "period_x": self.period_x, "period_y": self.period_y}


def precompact_test(lattice: PlanarLattice, depth: int = 100) -> PrecompactReport:
    """Expand x and y of the initial pair; quadratic surds give a genuine
    certificate (bounded periodic digits), rational coordinates mean divergence."""
    p = initial_pair(lattice)
    sp = section_coords(p)
    if not (is_exact(sp.x) and is_exact(sp.y)):
        raise ValueError("precompactness test needs exact coordinates")
    if not isinstance(sp.x, QuadraticSurd) or not isinstance(sp.y, QuadraticSurd):
        dx = CFExpansion.of(sp.x).prefix(depth) if 0 < sp.x < 1 else []
        dy = CFExpansion.of(sp.y).prefix(depth) if 0 < sp.y < 1 else []
        return PrecompactReport("divergent: rational coordinate", max(dx, default=None),
                                max(dy, default=None), dx, dy)
    ex, ey = CFExpansion.of(sp.x), CFExpansion.of(sp.y)
    dx, dy = ex.prefix(depth), ey.prefix(depth)
    return PrecompactReport("precompact certified to depth", max(dx), max(dy), dx, dy,
                            (ex.preperiod, ex.period), (ey.preperiod, ey.period))


def chain_jsonl(pairs: list[MinimalPair]) -> str:
    lines = []
    for n, p in enumerate(pairs):
        sp = section_coords(p)
        lines.append(json.dumps({"n": n, "x": number_to_json(sp.x), "y": number_to_json(sp.y),
                                 "eps": sp.eps, "r": [number_to_json(c) for c in p.r],
                                 "s": [number_to_json(c) for c in p.s]}))
    return "\n".join(lines) + "\n"
