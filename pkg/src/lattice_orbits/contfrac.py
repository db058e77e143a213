"""Continued fractions over exact scalars: digits, convergents, remainders,
Gauss-map iterates and cylinder intervals."""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .scalars import Exact, QuadraticSurd, exact


class ExpansionTerminated(ValueError):
    """The continued fraction of a rational ended before the requested index."""


def _check_unit_interval(x: Exact) -> Exact:
    x = exact(x)
    if not (0 < x < 1):
        raise ValueError(f"expected 0 < x < 1, got {x}")
    return x


def gauss_step(z: Exact) -> tuple[int, Exact]:
    """One step of z -> 1/z - floor(1/z); returns (digit, new z)."""
    rho = 1 / z
    a = math.floor(rho)
    return a, rho - a


def cf_digits(x: Exact, n: int) -> list[int]:
    """First ``n`` digits of the canonical expansion of ``x`` in (0, 1).

    Rationals stop at termination, so the result may be shorter than ``n``;
    the last digit of a terminated expansion is always >= 2.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return []
    z = _check_unit_interval(x)
    digits = []
    while len(digits) < n and z != 0:
        a, z = gauss_step(z)
        digits.append(a)
    return digits


def convergents(digits: Sequence[int]) -> list[Fraction]:
    """Convergents p_i/q_i of [0; a_1, ..., a_n] for i = 1..n."""
    return [Fraction(p, q) for p, q in convergent_pairs(digits)[2:]]


def convergent_pairs(digits: Sequence[int]) -> list[tuple[int, int]]:
    """Unreduced (p_i, q_i) for i = -1, 0, 1, ..., n (seeds (1,0), (0,1))."""
    pairs = [(1, 0), (0, 1)]
    for a in digits:
        if not isinstance(a, int) or a <= 0:
            raise ValueError(f"continued fraction digits must be positive integers, got {a!r}")
        (p2, q2), (p1, q1) = pairs[-2], pairs[-1]
        pairs.append((a * p1 + p2, a * q1 + q2))
    return pairs


def value_of(digits: Sequence[int], tail: Exact | None = None) -> Exact:
    """Exact value of [0; a_1, ..., a_n] or [0; a_1, ..., a_n + tail] when a
    tail in [0, 1) is supplied (i.e. the last remainder is a_n + tail)."""
    if not digits:
        return Fraction(0) if tail is None else exact(tail)
    acc: Exact = Fraction(0) if tail is None else exact(tail)
    for a in reversed(digits):
        acc = 1 / (a + acc)
    return acc


def remainder_and_z(x: Exact, n: int) -> tuple[Exact, Exact]:
    """(rho_n, z_n) with x = [0; a_1, ..., a_{n-1}, rho_n] and z_n = rho_n - a_n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    z = _check_unit_interval(x)
    rho: Exact = Fraction(0)
    for i in range(n):
        if z == 0:
            raise ExpansionTerminated(f"expansion of {x} terminated after {i} digits")
        rho = 1 / z
        z = rho - math.floor(rho)
    return rho, z


@dataclass(frozen=True)
class CylinderInterval:
    """I(k): the reals in [0, 1] whose first n digits are k."""

    index: tuple[int, ...]
    prev: Fraction          # p_{n-1}/q_{n-1}
    conv: Fraction          # p_n/q_n
    q_prev: int
    q: int
    left: Fraction
    right: Fraction
    left_closed: bool
    right_closed: bool

    @property
    def n(self) -> int:
        return len(self.index)

    @property
    def sigma(self) -> Fraction:
        return Fraction(self.q_prev, self.q)

    @property
    def length(self) -> Fraction:
        return self.right - self.left

    def contains(self, alpha: Exact) -> bool:
        lo_ok = self.left <= alpha if self.left_closed else self.left < alpha
        hi_ok = alpha <= self.right if self.right_closed else alpha < self.right
        return lo_ok and hi_ok

    def closure(self) -> tuple[Fraction, Fraction]:
        return self.left, self.right

    def child(self, digit: int) -> "CylinderInterval":
        return cylinder(self.index + (digit,))


def cylinder(k: Sequence[int]) -> CylinderInterval:
    if len(k) == 0:
        raise ValueError("cylinder needs a non-empty multi-index")
    pairs = convergent_pairs(k)
    (p_prev, q_prev), (p, q) = pairs[-2], pairs[-1]
    conv = Fraction(p, q)
    other = Fraction(p + p_prev, q + q_prev)
    if len(k) % 2 == 0:
        left, right, lc, rc = conv, other, True, False
    else:
        left, right, lc, rc = other, conv, False, True
    return CylinderInterval(tuple(k), Fraction(p_prev, q_prev) if q_prev else Fraction(0),
                            conv, q_prev, q, left, right, lc, rc)


class CFExpansion:
    """Lazily produced digit stream a_1, a_2, ... with memoization.

    ``source`` is one of ``"rational"``, ``"periodic"``, ``"list"``,
    ``"stream"``. Surds are expanded by exact iteration and their
    (preperiod, period) detected from repeated complete quotients.
    """

    def __init__(self, source: str, producer: Callable[[int], int | None],
                 length: int | None = None):
        self.source = source
        self._producer = producer
        self._length = length
        self._memo: list[int] = []
        self._lock = threading.Lock()
        self.preperiod: int | None = None
        self.period: int | None = None

    # constructors
    @classmethod
    def of(cls, x: Exact) -> "CFExpansion":
        x = _check_unit_interval(x)
        if isinstance(x, QuadraticSurd):
            return cls._periodic(x)
        digits = cf_digits(x, 10 ** 9)
        return cls("rational", digits.__getitem__, len(digits))

    @classmethod
    def from_digits(cls, digits: Iterable[int]) -> "CFExpansion":
        digits = list(digits)
        if any(a < 1 for a in digits):
            raise ValueError("digits must be >= 1")
        return cls("list", digits.__getitem__, len(digits))

    @classmethod
    def from_function(cls, f: Callable[[int], int]) -> "CFExpansion":
        """Infinite stream with a_i = f(i) for i >= 1."""
        return cls("stream", lambda i: f(i + 1))

    @classmethod
    def _periodic(cls, x: QuadraticSurd) -> "CFExpansion":
        seen: dict = {}
        digits: list[int] = []
        z: Exact = x
        while True:
            key = (z.a, z.b, z.c, z.d)
            if key in seen:
                start = seen[key]
                break
            seen[key] = len(digits)
            a, z = gauss_step(z)
            digits.append(a)
        pre, per = digits[:start], digits[start:]

        def produce(i: int) -> int:
            return pre[i] if i < len(pre) else per[(i - len(pre)) % len(per)]

        exp = cls("periodic", produce)
        exp.preperiod, exp.period = len(pre), len(per)
        exp._pre, exp._per = pre, per
        return exp

    @property
    def finite(self) -> bool:
        return self._length is not None

    def __len__(self) -> int:
        if self._length is None:
            raise TypeError("infinite expansion has no length")
        return self._length

    def digit(self, i: int) -> int:
        """a_i, 1-indexed."""
        if i < 1:
            raise IndexError("digits are 1-indexed")
        if self._length is not None and i > self._length:
            raise ExpansionTerminated(f"expansion has only {self._length} digits")
        with self._lock:
            while len(self._memo) < i:
                self._memo.append(self._producer(len(self._memo)))
            return self._memo[i - 1]

    def prefix(self, n: int) -> list[int]:
        if self._length is not None:
            n = min(n, self._length)
        return [self.digit(i) for i in range(1, n + 1)]

    def max_digit(self, depth: int | None = None) -> int:
        if self.source == "periodic":
            return max(self._pre + self._per)
        if depth is None:
            depth = len(self)
        return max(self.prefix(depth))

    def __repr__(self):
        extra = f", preperiod={self.preperiod}, period={self.period}" if self.period else ""
        return f"CFExpansion({self.source!r}{extra})"
