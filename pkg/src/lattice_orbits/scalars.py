"""Scalar tower: exact rationals, exact real quadratic surds, and mpmath floats.

Rationals are plain :class:`fractions.Fraction`. Quadratic surds
``(a + b*sqrt(d)) / c`` live in :class:`QuadraticSurd`; any arithmetic result
whose irrational part vanishes collapses back to a ``Fraction``. High precision
floats are ``mpmath.mpf`` evaluated at a working precision in bits.
"""
from __future__ import annotations

import math
import os
from fractions import Fraction
from numbers import Rational
from typing import Union

import mpmath

DEFAULT_PRECISION = 256
PRECISION_ENV = "LATTICE_ORBITS_PRECISION"

Exact = Union[int, Fraction, "QuadraticSurd"]
Number = Union[int, Fraction, "QuadraticSurd", mpmath.mpf]


def default_precision() -> int:
    """Working precision in bits; overridable through ``LATTICE_ORBITS_PRECISION``."""
    raw = os.environ.get(PRECISION_ENV)
    if raw:
        prec = int(raw)
        if prec < 53:
            raise ValueError(f"{PRECISION_ENV} must be at least 53 bits, got {prec}")
        return prec
    return DEFAULT_PRECISION


def _squarefree_part(n: int) -> tuple[int, int]:
    """Return (k, d) with n = k**2 * d and d square-free."""
    if n <= 0:
        raise ValueError("radicand must be positive")
    k, d = 1, n
    p = 2
    while p * p <= d:
        while d % (p * p) == 0:
            d //= p * p
            k *= p
        p += 1 if p == 2 else 2
    return k, d


class QuadraticSurd:
    """The real number ``(a + b*sqrt(d)) / c`` held exactly.

    Invariants: ``c > 0``, ``gcd(a, b, c) == 1``, ``d > 1`` square-free and
    ``b != 0``. Use :meth:`make` to build values; it returns a ``Fraction``
    when the irrational part is zero.
    """

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a: int, b: int, c: int, d: int):
        self.a, self.b, self.c, self.d = a, b, c, d

    @classmethod
    def make(cls, a: int, b: int, c: int, d: int) -> Union[Fraction, "QuadraticSurd"]:
        if c == 0:
            raise ZeroDivisionError("surd with zero denominator")
        if d <= 0:
            raise ValueError("radicand must be positive")
        k, d = _squarefree_part(d)
        b *= k
        if d == 1:
            return Fraction(a + b, c)
        if b == 0:
            return Fraction(a, c)
        if c < 0:
            a, b, c = -a, -b, -c
        g = math.gcd(math.gcd(a, b), c)
        return cls(a // g, b // g, c // g, d)

    @classmethod
    def sqrt(cls, n: int) -> Union[Fraction, "QuadraticSurd"]:
        return cls.make(0, 1, 1, n)

    # -- structure -----------------------------------------------------
    def conjugate(self) -> "QuadraticSurd":
        return QuadraticSurd(self.a, -self.b, self.c, self.d)

    def _coerce(self, other) -> tuple[int, int, int]:
        """Express ``other`` as (a, b, c) over this field."""
        if isinstance(other, QuadraticSurd):
            if other.d != self.d:
                raise ValueError(
                    f"cannot mix sqrt({self.d}) and sqrt({other.d}) surds")
            return other.a, other.b, other.c
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            return q.numerator, 0, q.denominator
        raise TypeError(f"unsupported operand {type(other).__name__}")

    # -- arithmetic ----------------------------------------------------
    def __add__(self, other):
        try:
            a2, b2, c2 = self._coerce(other)
        except TypeError:
            return NotImplemented
        return QuadraticSurd.make(self.a * c2 + a2 * self.c,
                                  self.b * c2 + b2 * self.c,
                                  self.c * c2, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticSurd(-self.a, -self.b, self.c, self.d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        try:
            a2, b2, c2 = self._coerce(other)
        except TypeError:
            return NotImplemented
        return QuadraticSurd.make(self.a * c2 - a2 * self.c,
                                  self.b * c2 - b2 * self.c,
                                  self.c * c2, self.d)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        try:
            a2, b2, c2 = self._coerce(other)
        except TypeError:
            return NotImplemented
        return QuadraticSurd.make(self.a * a2 + self.b * b2 * self.d,
                                  self.a * b2 + self.b * a2,
                                  self.c * c2, self.d)

    __rmul__ = __mul__

    def _inverse(self):
        # 1/((a + b r)/c) = c (a - b r) / (a^2 - b^2 d)
        norm = self.a * self.a - self.b * self.b * self.d
        return QuadraticSurd.make(self.c * self.a, -self.c * self.b, norm, self.d)

    def __truediv__(self, other):
        if isinstance(other, QuadraticSurd):
            return self * other._inverse()
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            q = Fraction(other)
            return QuadraticSurd.make(self.a * q.denominator, self.b * q.denominator,
                                      self.c * q.numerator, self.d)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self._inverse() * other
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return (1 / self) ** (-n)
        out: Exact = Fraction(1)
        base: Exact = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- order ---------------------------------------------------------
    def sign(self) -> int:
        """Exact sign of the value."""
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 with b^2 d
        lhs, rhs = self.a * self.a, self.b * self.b * self.d
        return sa if lhs > rhs else sb

    def _cmp(self, other) -> int:
        diff = self - other
        if isinstance(diff, QuadraticSurd):
            return diff.sign()
        return (diff > 0) - (diff < 0)

    def __eq__(self, other):
        if isinstance(other, QuadraticSurd):
            return (self.a, self.b, self.c, self.d) == (other.a, other.b, other.c, other.d)
        if isinstance(other, (int, Fraction)):
            return False  # b != 0 means irrational
        return NotImplemented

    def __hash__(self):
        return hash(("surd", self.a, self.b, self.c, self.d))

    def __lt__(self, other):
        try:
            return self._cmp(other) < 0
        except TypeError:
            return NotImplemented

    def __le__(self, other):
        try:
            return self._cmp(other) <= 0
        except TypeError:
            return NotImplemented

    def __gt__(self, other):
        try:
            return self._cmp(other) > 0
        except TypeError:
            return NotImplemented

    def __ge__(self, other):
        try:
            return self._cmp(other) >= 0
        except TypeError:
            return NotImplemented

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __floor__(self) -> int:
        # floor((a + s)/c) == floor((a + floor(s))/c) for integer c > 0
        root = math.isqrt(self.b * self.b * self.d)
        floor_s = root if self.b > 0 else -root - 1
        return (self.a + floor_s) // self.c

    def __ceil__(self) -> int:
        return math.floor(self) + 1  # never an integer

    def __float__(self) -> float:
        return float(self.to_mpf(80))

    def to_mpf(self, prec: int | None = None) -> mpmath.mpf:
        """Relative accuracy 2^-prec. Since a^2 - b^2 d is a nonzero integer,
        |a + b sqrt(d)| >= 1/(|a| + |b| sqrt(d)), so cancellation costs at most
        about twice the coefficient bit length."""
        prec = prec or default_precision()
        guard = 2 * max(abs(self.a).bit_length(), (abs(self.b) * self.d).bit_length()) + 16
        with mpmath.workprec(prec + guard):
            val = (self.a + self.b * mpmath.sqrt(self.d)) / self.c
        with mpmath.workprec(prec):
            return +val

    def __repr__(self):
        return f"QuadraticSurd({self.a}, {self.b}, {self.c}, {self.d})"

    def __str__(self):
        return f"({self.a}{'+' if self.b >= 0 else '-'}{abs(self.b)}*sqrt({self.d}))/{self.c}"


# -- helpers over the whole tower ----------------------------------------

def is_exact(v) -> bool:
    return isinstance(v, (int, Fraction, QuadraticSurd))


def exact(v) -> Exact:
    """Normalize ints to ``Fraction``; reject floats."""
    if isinstance(v, bool):
        raise TypeError("bool is not a number here")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, (Fraction, QuadraticSurd)):
        return v
    if isinstance(v, Rational):
        return Fraction(v.numerator, v.denominator)
    raise TypeError(f"expected an exact number, got {type(v).__name__}")


def to_mpf(v, prec: int | None = None) -> mpmath.mpf:
    """Total conversion into ``mpmath.mpf`` (correctly rounded for exact input)."""
    prec = prec or default_precision()
    if isinstance(v, QuadraticSurd):
        return v.to_mpf(prec)
    with mpmath.workprec(prec):
        if isinstance(v, Fraction):
            return mpmath.mpf(v.numerator) / v.denominator
        if isinstance(v, int):
            return mpmath.mpf(v)
        return mpmath.mpf(v)


def frac_part(v: Exact) -> Exact:
    return v - math.floor(v)


def sign(v) -> int:
    if isinstance(v, QuadraticSurd):
        return v.sign()
    return (v > 0) - (v < 0)


def common_field(*values) -> int | None:
    """Radicand shared by the surds among ``values`` (None if all rational)."""
    ds = {v.d for v in values if isinstance(v, QuadraticSurd)}
    if len(ds) > 1:
        raise ValueError(f"values live in different quadratic fields: {sorted(ds)}")
    return ds.pop() if ds else None


# -- literals ------------------------------------------------------------

GOLDEN = QuadraticSurd.make(-1, 1, 2, 5)      # (sqrt5 - 1)/2 = [0; 1, 1, ...]
SILVER = QuadraticSurd.make(-1, 1, 1, 2)      # sqrt2 - 1 = [0; 2, 2, ...]
ALIASES = {"phi": GOLDEN, "sqrt2m1": SILVER}


def parse_surd(text: str) -> Exact:
    """Parse ``sqrtD:a:b:c`` meaning ``(a + b*sqrt(D))/c``; ``sqrtD:a:c`` is
    shorthand for b = 1. Aliases phi, sqrt2m1."""
    text = text.strip()
    if text in ALIASES:
        return ALIASES[text]
    parts = text.split(":")
    if len(parts) not in (3, 4) or not parts[0].startswith("sqrt"):
        raise ValueError(f"bad surd literal {text!r}; expected sqrtD:a:b:c or sqrtD:a:c")
    if len(parts) == 3:
        parts = [parts[0], parts[1], "1", parts[2]]
    d = int(parts[0][4:])
    a, b, c = (int(p) for p in parts[1:])
    return QuadraticSurd.make(a, b, c, d)


def parse_number(text: str) -> Number:
    """Parse ``rational:p/q``, ``surd:<surd literal>``, ``float:<decimal>``,
    a bare alias, a bare surd literal, or a bare rational."""
    text = text.strip()
    kind, _, body = text.partition(":")
    if kind == "rational":
        return Fraction(body)
    if kind == "surd":
        return parse_surd(body)
    if kind == "float":
        return to_mpf(body)
    if text in ALIASES or text.startswith("sqrt"):
        return parse_surd(text)
    return Fraction(text)


# -- JSON ----------------------------------------------------------------

def number_to_json(v) -> dict:
    """Bit-exact JSON encoding with decimal-string integers."""
    if isinstance(v, (int, Fraction)):
        q = Fraction(v)
        return {"type": "rational", "num": str(q.numerator), "den": str(q.denominator)}
    if isinstance(v, QuadraticSurd):
        return {"type": "surd", "a": str(v.a), "b": str(v.b), "c": str(v.c), "d": str(v.d)}
    if isinstance(v, mpmath.mpf):
        man, exp = v.man_exp if v != 0 else (0, 0)
        return {"type": "float", "mantissa": str(man), "exponent": str(exp),
                "decimal": mpmath.nstr(v, 20)}
    if isinstance(v, float):
        return number_to_json(mpmath.mpf(v))
    raise TypeError(f"cannot serialize {type(v).__name__}")


def number_from_json(obj: dict) -> Number:
    kind = obj["type"]
    if kind == "rational":
        return Fraction(int(obj["num"]), int(obj["den"]))
    if kind == "surd":
        return QuadraticSurd.make(int(obj["a"]), int(obj["b"]), int(obj["c"]), int(obj["d"]))
    if kind == "float":
        man, exp = int(obj["mantissa"]), int(obj["exponent"])
        with mpmath.workprec(max(man.bit_length(), 53)):
            return mpmath.ldexp(mpmath.mpf(man), exp)
    raise ValueError(f"unknown number type {kind!r}")
