"""Synthesis of badly approximable alpha whose forward orbit accumulates on a
lattice with precompact orbit, by planting digit blocks B_k = (c_k..c_1, b_1..b_k)
at sparse even positions, plus numerical verification of the accumulation."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from .contfrac import CFExpansion, convergent_pairs, value_of
from .flow import lattice_from_alpha
from .scalars import QuadraticSurd, default_precision, to_mpf
from .section import SectionPoint, chain, gauss_T, initial_pair, section_coords


class PlanError(ValueError):
    pass


# -- positions ----------------------------------------------------------------

class Positions:
    """The sequence m_1 < m_2 < ... of block centres: either the cubic rule
    m_k = 2k^3 (infinite) or an explicit finite list."""

    def __init__(self, rule: str | Sequence[int] = "cubic"):
        if isinstance(rule, str):
            if rule != "cubic":
                raise PlanError(f"unknown position rule {rule!r}")
            self.rule, self._list = "cubic", None
        else:
            self.rule, self._list = "list", [int(m) for m in rule]
            validate_positions(self._list)

    @property
    def finite(self) -> bool:
        return self._list is not None

    def __len__(self) -> int:
        if self._list is None:
            raise TypeError("the cubic rule is infinite")
        return len(self._list)

    def m(self, k: int) -> int:
        if k < 1:
            raise IndexError("blocks are 1-indexed")
        if self._list is None:
            return 2 * k ** 3
        if k > len(self._list):
            raise IndexError(f"only {len(self._list)} positions given")
        return self._list[k - 1]

    def count(self) -> int | None:
        return None if self._list is None else len(self._list)

    def upto(self, n: int) -> list[int]:
        """Indices k of blocks whose span starts at or before n."""
        out = []
        k = 1
        while (self.count() is None or k <= self.count()) and self.m(k) - k + 1 <= n:
            out.append(k)
            k += 1
        return out

    def span(self, k: int) -> tuple[int, int]:
        """Occupied digit positions [m_k - k + 1, m_k + k]."""
        m = self.m(k)
        return m - k + 1, m + k

    def block_at(self, i: int) -> tuple[int, int] | None:
        """(k, offset) if digit position i lies in block k."""
        for k in self.upto(i):
            lo, hi = self.span(k)
            if lo <= i <= hi:
                return k, i - lo
        return None

    def to_json(self):
        return "cubic" if self._list is None else list(self._list)


def sparse_positions(count: int, rule: str = "cubic") -> list[int]:
    """First ``count`` positions, m_k = 2k^3 by default."""
    if count < 1:
        raise PlanError("count must be >= 1")
    pos = Positions(rule)
    out = [pos.m(k) for k in range(1, count + 1)]
    validate_positions(out)
    return out


def validate_positions(positions: Sequence[int]) -> None:
    """Even entries, m_1 >= 2 (so position 1 stays free for d_1) and
    m_k - m_{k-1} > 2k for k > 1, which keeps blocks disjoint."""
    for k, m in enumerate(positions, start=1):
        if m % 2:
            raise PlanError(f"m_{k} = {m} is odd")
        if k == 1 and m < 2:
            raise PlanError("m_1 must be at least 2")
        if k > 1 and not m - positions[k - 2] > 2 * k:
            raise PlanError(f"m_{k} - m_{k-1} = {m - positions[k - 2]} is not > {2 * k}")


def density(positions: Sequence[int] | Positions, n: int) -> Fraction:
    """sum over m_k < n of 2k, divided by n."""
    pos = positions if isinstance(positions, Positions) else Positions(positions)
    total = 0
    k = 1
    while (pos.count() is None or k <= pos.count()) and pos.m(k) < n:
        total += 2 * k
        k += 1
    return Fraction(total, n)


def occupancy(positions: Sequence[int] | Positions, n: int) -> Fraction:
    """Fraction of the positions 1..n covered by block spans (partial blocks included)."""
    pos = positions if isinstance(positions, Positions) else Positions(positions)
    covered = 0
    for k in pos.upto(n):
        lo, hi = pos.span(k)
        covered += min(hi, n) - lo + 1
    return Fraction(covered, n)


# -- plans and streams --------------------------------------------------------

def block(b: CFExpansion, c: CFExpansion, k: int) -> tuple[int, ...]:
    """B_k = (c_k, ..., c_1, b_1, ..., b_k)."""
    return tuple(c.digit(i) for i in range(k, 0, -1)) + tuple(b.digit(i) for i in range(1, k + 1))


def align_target(target: SectionPoint) -> SectionPoint:
    """A point of the same orbit with eps = -1.

    Starting from the pair ((-1, 0), (alpha, 1)), the chain pair after n steps
    has eps = (-1)^(n+1); at the even block centres this is -1. A target with
    eps = +1 is therefore replaced by its successor (T(x, y), -eps), which codes
    the same orbit.
    """
    if target.eps == -1:
        return target
    x, y = gauss_T(target.x, target.y)
    return SectionPoint(x, y, -target.eps)


@dataclass
class BlockPlan:
    target: SectionPoint          # the lattice the orbit should accumulate on
    aligned: SectionPoint         # the orbit point actually matched at block centres
    b: CFExpansion
    c: CFExpansion
    M: int
    L: int
    positions: Positions
    filler: int = 1
    first_digit: int = 2

    def to_json(self) -> dict:
        return {"target": self.target.to_json(), "aligned": self.aligned.to_json(),
                "M": self.M, "L": self.L, "positions": self.positions.to_json(),
                "filler": self.filler, "first_digit": self.first_digit,
                "b_period": [self.b.preperiod, self.b.period],
                "c_period": [self.c.preperiod, self.c.period]}


class SynthesizedAlpha:
    """alpha = [0; d_1, d_2, ...] produced lazily from a plan."""

    def __init__(self, plan: BlockPlan):
        self.plan = plan
        self.expansion = CFExpansion.from_function(self._digit)
        self._mp_cache: dict[int, mpmath.mpf] = {}

    def _digit(self, i: int) -> int:
        if i == 1:
            return self.plan.first_digit
        hit = self.plan.positions.block_at(i)
        if hit is None:
            return self.plan.filler
        k, off = hit
        return block(self.plan.b, self.plan.c, k)[off]

    def digit(self, i: int) -> int:
        return self.expansion.digit(i)

    def prefix(self, n: int) -> list[int]:
        return self.expansion.prefix(n)

    def block_map(self, K: int) -> dict[int, tuple[int, int]]:
        return {k: self.plan.positions.span(k) for k in range(1, K + 1)}

    def read_block(self, k: int) -> tuple[int, ...]:
        lo, hi = self.plan.positions.span(k)
        return tuple(self.digit(i) for i in range(lo, hi + 1))

    def convergent(self, n: int) -> Fraction:
        return value_of(self.prefix(n))

    def to_mpf(self, prec: int | None = None) -> mpmath.mpf:
        """alpha to ``prec`` bits, from a convergent with 1/q_n^2 < 2^-(prec+16)."""
        prec = prec or default_precision()
        if prec not in self._mp_cache:
            n = 8
            while True:
                pairs = convergent_pairs(self.prefix(n))
                if pairs[-1][1].bit_length() * 2 > prec + 18:
                    break
                n *= 2
            p, q = pairs[-1]
            self._mp_cache[prec] = to_mpf(Fraction(p, q), prec)
        return self._mp_cache[prec]

    def surrogate(self, depth: int) -> Fraction:
        """Rational alpha with the first ``depth`` digits."""
        return self.convergent(depth)


def synthesize(target: SectionPoint, L: int = 2, positions: str | Sequence[int] = "cubic",
               filler: int = 1, align: bool = True) -> SynthesizedAlpha:
    """Plan digits so that the orbit of Lambda_alpha passes ever closer to the
    lattice coded by ``target`` (whose coordinates must be quadratic surds)."""
    if not (isinstance(target.x, QuadraticSurd) and isinstance(target.y, QuadraticSurd)):
        raise PlanError("target coordinates must be quadratic surds (certified precompact)")
    aligned = align_target(target) if align else target
    b, c = CFExpansion.of(aligned.x), CFExpansion.of(aligned.y)
    M = max(b.max_digit(), c.max_digit())
    if L < M:
        raise PlanError(f"L = {L} is below the block digit bound M = {M}")
    if L < 2:
        raise PlanError("L must be at least 2 (the first digit is 2)")
    if not 1 <= filler <= L:
        raise PlanError("filler digit must lie in 1..L")
    plan = BlockPlan(target, aligned, b, c, M, L, Positions(positions), filler)
    return SynthesizedAlpha(plan)


# -- verification -------------------------------------------------------------

def intrinsic_matrix(x, y, eps: int, prec: int | None = None):
    prec = prec or default_precision()
    with mpmath.workprec(prec):
        xm, ym = to_mpf(x, prec), to_mpf(y, prec)
        one = 1 + xm * ym
        return ((mpmath.mpf(eps), -eps * xm), (ym / one, 1 / one))


@dataclass
class Checkpoint:
    k: int
    n: int
    distance: mpmath.mpf
    tail_error: mpmath.mpf
    eps: int

    def to_json(self) -> dict:
        return {"k": self.k, "n": self.n, "distance": mpmath.nstr(self.distance, 10),
                "tail_error": mpmath.nstr(self.tail_error, 3), "eps": self.eps}


@dataclass
class LimitReport:
    checkpoints: list[Checkpoint]
    C: mpmath.mpf
    tolerance: float
    passed: bool
    envelope_ok: bool
    target: SectionPoint
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"checkpoints": [c.to_json() for c in self.checkpoints],
                "C": mpmath.nstr(self.C, 6), "tolerance": self.tolerance,
                "passed": self.passed, "envelope_ok": self.envelope_ok,
                "target": self.target.to_json(), "notes": self.notes}


def verify_limit_point(sa: SynthesizedAlpha, checkpoints: int, tail_depth: int = 60,
                       target: SectionPoint | None = None, tolerance: float = 1e-2,
                       prec: int | None = None) -> LimitReport:
    """Distance between the chain basis of Lambda_alpha at n = m_k and the target's
    intrinsic basis, for k = 1..checkpoints.

    x_n uses the digits d_{n+1}..d_{n+D} (truncation error <= 2^-(D-1)), y_n the
    exact reversed prefix, eps_n = (-1)^(n+1). ``target`` defaults to the plan's
    aligned point; a user target goes through the same alignment.
    """
    prec = prec or default_precision()
    plan = sa.plan
    if target is None:
        goal = plan.aligned
    else:
        goal = align_target(target) if plan.aligned is not plan.target else target
    if plan.positions.finite and checkpoints > len(plan.positions):
        raise PlanError(f"only {len(plan.positions)} blocks are planned")
    ref = intrinsic_matrix(goal.x, goal.y, goal.eps, prec)
    tail_err = mpmath.ldexp(1, -(tail_depth - 1))
    out = []
    for k in range(1, checkpoints + 1):
        n = plan.positions.m(k)
        digits = sa.prefix(n + tail_depth)
        x = value_of(digits[n:n + tail_depth])
        y = value_of(digits[:n][::-1])
        eps = (-1) ** (n + 1)
        got = intrinsic_matrix(x, y, eps, prec)
        with mpmath.workprec(prec):
            dist = max(abs(got[i][j] - ref[i][j]) for i in range(2) for j in range(2))
        out.append(Checkpoint(k, n, dist, tail_err, eps))
    with mpmath.workprec(prec):
        C = max((c.distance + c.tail_error) * mpmath.mpf(2) ** c.k for c in out)
        d1 = out[0].distance
        envelope = all(c.distance <= 4 * mpmath.mpf(2) ** -c.k * (1 + d1) + c.tail_error
                       for c in out[1:])
    final = out[-1].distance + out[-1].tail_error
    notes = []
    if goal.eps != plan.aligned.eps:
        notes.append("target eps differs from the chain parity at block centres")
    return LimitReport(out, C, tolerance, bool(final < tolerance), envelope, goal, notes)


@dataclass
class ChainConsistency:
    depth: int
    checked: int
    mismatches: list[int]

    @property
    def ok(self) -> bool:
        return not self.mismatches


def chain_consistency(sa: SynthesizedAlpha, K: int, tail_depth: int = 60) -> ChainConsistency:
    """Run the minimal-vector chain on Lambda_{alpha'} for the rational surrogate
    alpha' = [0; d_1..d_N], N = m_K + K + D, and compare every pair n <= m_K with
    x_n = [0; d_{n+1}..d_N], y_n = [0; d_n..d_1], eps_n = (-1)^(n+1), exactly."""
    m_K = sa.plan.positions.m(K)
    N = m_K + K + tail_depth
    digits = sa.prefix(N)
    alpha = value_of(digits)
    pairs = chain(initial_pair(lattice_from_alpha(alpha)), m_K)
    bad = []
    for n, p in enumerate(pairs):
        sp = section_coords(p)
        if (sp.x != value_of(digits[n:]) or sp.y != value_of(digits[:n][::-1])
                or sp.eps != (-1) ** (n + 1)):
            bad.append(n)
    if len(pairs) != m_K + 1:
        bad.append(len(pairs))
    return ChainConsistency(N, len(pairs), bad)
