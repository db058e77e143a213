"""Unimodular planar lattices, the diagonal flow g_t, horocycles u_x / v_y,
shortest vectors under a norm, and orbit scans t -> lambda_1(g_t L)."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
import numpy as np

from .scalars import (QuadraticSurd, default_precision, is_exact, number_to_json,
                      to_mpf)


class PrecisionError(ArithmeticError):
    """Working precision is too low for the requested flow time."""


class DegenerateLattice(ValueError):
    pass


Matrix = tuple[tuple, tuple]


# -- matrix helpers ---------------------------------------------------------

def _promote(entries: Sequence, prec: int | None = None) -> list:
    """Exact stays exact; anything else becomes mpf."""
    if all(is_exact(e) for e in entries):
        return [Fraction(e) if isinstance(e, int) else e for e in entries]
    return [to_mpf(e, prec) if not isinstance(e, mpmath.mpf) else e for e in entries]


def mat_mul(A: Matrix, B: Matrix) -> Matrix:
    (a, b), (c, d) = A
    (e, f), (g, h) = B
    a, b, c, d, e, f, g, h = _promote([a, b, c, d, e, f, g, h])
    return ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))


def det(M: Matrix):
    (a, b), (c, d) = M
    return a * d - b * c


def _round_int(x) -> int:
    if isinstance(x, mpmath.mpf):
        return int(mpmath.nint(x))
    return int(round(x))


# -- group elements ---------------------------------------------------------

@dataclass(frozen=True)
class GroupElement:
    """An element of SL_2(R) acting on column vectors."""

    matrix: Matrix
    label: str = ""

    def __post_init__(self):
        d = det(self.matrix)
        if is_exact(d):
            if d != 1:
                raise ValueError(f"group element must have determinant 1, got {d}")
        elif abs(d - 1) > _det_tolerance(self.matrix):
            raise ValueError(f"group element determinant {d} is not 1")

    @classmethod
    def identity(cls) -> "GroupElement":
        return cls(((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))), "e")

    @classmethod
    def flow(cls, t, prec: int | None = None) -> "GroupElement":
        """g_t = diag(e^t, e^-t); always a BigFloat unless t == 0."""
        if is_exact(t) and t == 0:
            return cls.identity()
        with mpmath.workprec(prec or default_precision()):
            tt = to_mpf(t, prec)
            et, emt = mpmath.exp(tt), mpmath.exp(-tt)
        return cls(((et, mpmath.mpf(0)), (mpmath.mpf(0), emt)), f"g_{mpmath.nstr(tt, 8)}")

    @classmethod
    def upper(cls, x) -> "GroupElement":
        """u_x = [[1, x], [0, 1]]."""
        one, zero, x = _promote([1, 0, x])
        return cls(((one, x), (zero, one)), "u")

    @classmethod
    def lower(cls, y) -> "GroupElement":
        """v_y = [[1, 0], [y, 1]]."""
        one, zero, y = _promote([1, 0, y])
        return cls(((one, zero), (y, one)), "v")

    @classmethod
    def rotation(cls, theta, prec: int | None = None) -> "GroupElement":
        with mpmath.workprec(prec or default_precision()):
            th = to_mpf(theta, prec)
            c, s = mpmath.cos(th), mpmath.sin(th)
        return cls(((c, -s), (s, c)), "k")

    @classmethod
    def from_matrix(cls, rows: Sequence[Sequence], label: str = "") -> "GroupElement":
        (a, b), (c, d) = rows
        return cls(((a, b), (c, d)), label)

    def __matmul__(self, other):
        if isinstance(other, GroupElement):
            return GroupElement(mat_mul(self.matrix, other.matrix), f"{self.label}{other.label}")
        if isinstance(other, PlanarLattice):
            return act(self, other)
        return NotImplemented

    def inverse(self) -> "GroupElement":
        (a, b), (c, d) = self.matrix
        return GroupElement(((d, -b), (-c, a)), f"({self.label})^-1")

    def apply(self, v: Sequence):
        (a, b), (c, d) = self.matrix
        x, y = v
        return (a * x + b * y, c * x + d * y)

    def to_float(self) -> np.ndarray:
        return np.array([[float(e) for e in row] for row in self.matrix])


def _det_tolerance(M: Matrix) -> float:
    """2^(-P/2) with P the precision carried by the entries."""
    prec = 53 if any(isinstance(e, float) for row in M for e in row) else mpmath.mp.prec
    if any(isinstance(e, mpmath.mpf) for row in M for e in row):
        prec = max(prec, default_precision()) if mpmath.mp.prec >= default_precision() else mpmath.mp.prec
    return 2.0 ** (-(prec // 2))


# -- lattices ---------------------------------------------------------------

@dataclass(frozen=True)
class PlanarLattice:
    """A unimodular lattice B Z^2; the columns of ``basis`` are the basis vectors.

    Orientation is normalized to det = +1 by negating the first column, which
    does not change the lattice; the provenance records when that happened.
    """

    basis: Matrix
    provenance: str = ""

    def __post_init__(self):
        (a, b), (c, d) = self.basis
        if (a == 0 and c == 0) or (b == 0 and d == 0):
            raise DegenerateLattice("basis vectors must be nonzero")
        dt = det(self.basis)
        if is_exact(dt):
            if dt not in (1, -1):
                raise DegenerateLattice(f"basis determinant must be +-1, got {dt}")
        elif abs(abs(dt) - 1) > _det_tolerance(self.basis):
            raise DegenerateLattice(f"basis determinant {dt} is not +-1")
        if dt < 0:
            object.__setattr__(self, "basis", ((-a, b), (-c, d)))
            object.__setattr__(self, "provenance", self.provenance + "|oriented")

    @classmethod
    def from_columns(cls, v1: Sequence, v2: Sequence, provenance: str = "") -> "PlanarLattice":
        entries = _promote([v1[0], v2[0], v1[1], v2[1]])
        return cls(((entries[0], entries[1]), (entries[2], entries[3])), provenance)

    @classmethod
    def standard(cls) -> "PlanarLattice":
        return cls(((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))), "Z2")

    @property
    def columns(self) -> tuple[tuple, tuple]:
        (a, b), (c, d) = self.basis
        return (a, c), (b, d)

    @property
    def exact(self) -> bool:
        return all(is_exact(e) for row in self.basis for e in row)

    def vector(self, i: int, j: int) -> tuple:
        (a, b), (c, d) = self.basis
        return (a * i + b * j, c * i + d * j)

    def coordinates(self, v: Sequence) -> tuple:
        """Solve B (i, j) = v (det is 1 after normalization)."""
        (a, b), (c, d) = self.basis
        x, y = v
        return (d * x - b * y, -c * x + a * y)

    def contains(self, v: Sequence) -> bool:
        i, j = self.coordinates(v)
        if self.exact and is_exact(v[0]) and is_exact(v[1]):
            return all(isinstance(z, (int, Fraction)) and Fraction(z).denominator == 1
                       for z in (i, j))
        tol = 2.0 ** -40
        return abs(i - _round_int(i)) < tol and abs(j - _round_int(j)) < tol

    def to_mpf(self, prec: int | None = None) -> Matrix:
        return tuple(tuple(to_mpf(e, prec) for e in row) for row in self.basis)

    def to_float(self) -> np.ndarray:
        return np.array([[float(e) for e in row] for row in self.basis])

    def to_json(self) -> dict:
        return {"basis": [[number_to_json(e) for e in row] for row in self.basis],
                "provenance": self.provenance}


def lattice_from_alpha(alpha) -> PlanarLattice:
    """Lambda_alpha = [[1, alpha], [0, 1]] Z^2."""
    one, zero, alpha = _promote([1, 0, alpha])
    return PlanarLattice(((one, alpha), (zero, one)), f"Lambda_{alpha}")


def act(g: GroupElement, lattice: PlanarLattice) -> PlanarLattice:
    basis = mat_mul(g.matrix, lattice.basis)
    dt = det(basis)
    if not is_exact(dt) and abs(dt - 1) > 2.0 ** -8:
        raise PrecisionError(f"determinant drifted to {dt} after acting by {g.label}")
    return PlanarLattice(basis, f"{g.label}.{lattice.provenance}")


def same_lattice(A: PlanarLattice, B: PlanarLattice, tol: float = 1e-9) -> bool:
    """True when B's basis is an integer change of A's basis."""
    (a, b), (c, d) = A.basis
    (e, f), (g, h) = B.basis
    # A^{-1} B with det A = 1
    coeffs = [d * e - b * g, d * f - b * h, -c * e + a * g, -c * f + a * h]
    if all(is_exact(z) for z in coeffs):
        return all(Fraction(z).denominator == 1 for z in coeffs if isinstance(z, (int, Fraction))) \
            and not any(isinstance(z, QuadraticSurd) for z in coeffs)
    return all(abs(z - _round_int(z)) < tol for z in coeffs)


# -- reduction and shortest vectors -----------------------------------------

def gauss_reduce(u: Sequence, v: Sequence, max_steps: int = 10_000):
    """Lagrange-Gauss reduction in the Euclidean inner product.

    Returns ``(u', v', C)`` where ``[u' v'] = [u v] C`` with integer ``C`` and
    ``|u'| <= |v'|``, ``2|<u', v'>| <= |u'|^2``.
    """
    C = [[1, 0], [0, 1]]
    u, v = list(u), list(v)

    def dot(p, q):
        return p[0] * q[0] + p[1] * q[1]

    for _ in range(max_steps):
        nu, nv = dot(u, u), dot(v, v)
        if nu == 0 or nv == 0:
            raise DegenerateLattice("zero vector during reduction")
        if nv < nu:
            u, v = v, u
            C = [[C[0][1], C[0][0]], [C[1][1], C[1][0]]]
            nu, nv = nv, nu
        uv = dot(u, v)
        if 2 * abs(uv) <= nu:
            return tuple(u), tuple(v), C
        mu = _round_int(uv / nu)
        v = [v[0] - mu * u[0], v[1] - mu * u[1]]
        C = [[C[0][0], C[0][1] - mu * C[0][0]], [C[1][0], C[1][1] - mu * C[1][0]]]
    raise DegenerateLattice("reduction did not terminate")


def _mat_int_mul(A, B):
    return [[A[0][0] * B[0][0] + A[0][1] * B[1][0], A[0][0] * B[0][1] + A[0][1] * B[1][1]],
            [A[1][0] * B[0][0] + A[1][1] * B[1][0], A[1][0] * B[0][1] + A[1][1] * B[1][1]]]


def search_bound(norm, u_len: float, nu_min: float) -> int:
    """Coefficient bound for the enumeration over a Gauss-reduced basis.

    For a reduced basis |i u + j v|^2 >= (3/4) max(|i|,|j|)^2 |u|^2, while any
    vector beating the incumbent has |w| <= nu_min / c_lo.
    """
    c_lo, _ = norm.equivalence_constants()
    return int(math.floor(2.0 / math.sqrt(3.0) * nu_min / (c_lo * u_len))) + 1


def _combos(bound: int) -> np.ndarray:
    """Nonzero integer pairs up to sign with max(|i|,|j|) <= bound."""
    out = [(i, j) for j in range(0, bound + 1) for i in range(-bound, bound + 1)
           if j > 0 or i > 0]
    return np.array(out, dtype=np.int64)


@dataclass(frozen=True)
class ShortestVector:
    value: mpmath.mpf
    witness: tuple[int, int]     # coordinates in the lattice's own basis
    vector: tuple


def shortest_vector(lattice: PlanarLattice, norm, prec: int | None = None) -> ShortestVector:
    """Minimal norm over nonzero lattice vectors, with an integer witness."""
    prec = prec or default_precision()
    with mpmath.workprec(prec):
        M = lattice.to_mpf(prec)
        u, v, C = gauss_reduce((M[0][0], M[1][0]), (M[0][1], M[1][1]))
        return _shortest_from_reduced(u, v, C, norm, prec)


def _shortest_from_reduced(u, v, C, norm, prec) -> ShortestVector:
    uf = np.array([float(u[0]), float(u[1])])
    vf = np.array([float(v[0]), float(v[1])])
    vals0 = norm.batch(np.stack([uf, vf]))
    bound = search_bound(norm, float(np.hypot(*uf)), float(vals0.min()))
    combos = _combos(bound)
    vecs = combos[:, :1] * uf + combos[:, 1:] * vf
    vals = norm.batch(vecs)
    best = vals.min()
    close = np.nonzero(vals <= best * (1 + 1e-9) + 1e-300)[0]
    cands = []
    for idx in close:
        i, j = int(combos[idx, 0]), int(combos[idx, 1])
        w = (u[0] * i + v[0] * j, u[1] * i + v[1] * j)
        wi = C[0][0] * i + C[0][1] * j
        wj = C[1][0] * i + C[1][1] * j
        cands.append((norm(w), abs(wi) + abs(wj), -wi, -wj, wi, wj, w))
    cands.sort(key=lambda c: c[:4])
    value, _, _, _, wi, wj, w = cands[0]
    if wj < 0 or (wj == 0 and wi < 0):
        wi, wj, w = -wi, -wj, (-w[0], -w[1])
    return ShortestVector(value, (wi, wj), w)


def lambda1_batch(bases: np.ndarray, norm, max_bound: int = 12) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized float64 lambda_1 for an array of bases of shape (N, 2, 2)
    (columns are basis vectors). Returns (values, witnesses in the given bases)."""
    bases = np.array(bases, dtype=float)
    n = bases.shape[0]
    u = bases[:, :, 0].copy()
    v = bases[:, :, 1].copy()
    C = np.tile(np.eye(2, dtype=np.int64), (n, 1, 1))
    for _ in range(200):
        nu = np.einsum("ij,ij->i", u, u)
        nv = np.einsum("ij,ij->i", v, v)
        swap = nv < nu
        if swap.any():
            u[swap], v[swap] = v[swap].copy(), u[swap].copy()
            C[swap] = C[swap][:, :, ::-1]
            nu = np.where(swap, nv, nu)
        ratio = np.einsum("ij,ij->i", u, v) / nu
        active = np.abs(ratio) > 0.5 + 1e-12
        mu = np.where(active, np.rint(ratio), 0.0)
        if not active.any():
            break
        v -= mu[:, None] * u
        C[:, :, 1] -= mu.astype(np.int64)[:, None] * C[:, :, 0]
    else:
        raise DegenerateLattice("batch reduction did not converge")
    return _lambda1_reduced_batch(u, v, C, norm, max_bound)


def _lambda1_reduced_batch(u, v, C, norm, max_bound):
    inc = np.minimum(norm.batch(u), norm.batch(v))
    c_lo, _ = norm.equivalence_constants()
    ulen = np.hypot(u[:, 0], u[:, 1])
    need = np.floor(2.0 / math.sqrt(3.0) * inc / (c_lo * ulen)).astype(int) + 1
    bound = int(min(need.max(), max_bound))
    combos = _combos(bound)
    values = np.empty(len(u))
    wit = np.empty((len(u), 2), dtype=np.int64)
    chunk = max(1, 400_000 // len(combos))
    for s in range(0, len(u), chunk):
        uu, vv = u[s:s + chunk], v[s:s + chunk]
        vecs = combos[None, :, 0, None] * uu[:, None, :] + combos[None, :, 1, None] * vv[:, None, :]
        vals = norm.batch(vecs)
        k = vals.argmin(axis=1)
        values[s:s + chunk] = vals[np.arange(len(uu)), k]
        ij = combos[k]
        Cc = C[s:s + chunk]
        wit[s:s + chunk, 0] = Cc[:, 0, 0] * ij[:, 0] + Cc[:, 0, 1] * ij[:, 1]
        wit[s:s + chunk, 1] = Cc[:, 1, 0] * ij[:, 0] + Cc[:, 1, 1] * ij[:, 1]
    return values, wit


# -- orbits -----------------------------------------------------------------

@dataclass(frozen=True)
class OrbitSample:
    t: mpmath.mpf
    lambda1: mpmath.mpf
    witness: tuple[int, int]


class OrbitEvaluator:
    """Evaluates lambda_1(g_t L) with warm-started reduction.

    Exact bases are combined with the integer change of basis exactly before
    rounding, so the only loss is the final conversion; BigFloat bases carry
    an error estimate that grows like e^{2|t|} 2^{-P}.
    """

    def __init__(self, lattice: PlanarLattice, norm, prec: int | None = None):
        self.lattice = lattice
        self.norm = norm
        self.prec = prec or default_precision()
        self.exact = lattice.exact
        with mpmath.workprec(self.prec):
            self._Bmp = lattice.to_mpf(self.prec)
        self._scale = max(abs(e) for row in self._Bmp for e in row)
        self.C = [[1, 0], [0, 1]]
        self._cacheC = None
        self._cacheBC = None
        self.max_error = mpmath.mpf(0)

    def _BC(self):
        key = tuple(map(tuple, self.C))
        if key != self._cacheC:
            C = self.C
            if self.exact:
                (a, b), (c, d) = self.lattice.basis
                ent = [a * C[0][0] + b * C[1][0], a * C[0][1] + b * C[1][1],
                       c * C[0][0] + d * C[1][0], c * C[0][1] + d * C[1][1]]
                ent = [to_mpf(e, self.prec) for e in ent]
            else:
                (a, b), (c, d) = self._Bmp
                ent = [a * C[0][0] + b * C[1][0], a * C[0][1] + b * C[1][1],
                       c * C[0][0] + d * C[1][0], c * C[0][1] + d * C[1][1]]
            self._cacheC, self._cacheBC = key, ent
        return self._cacheBC

    def reduced_at(self, t):
        """Reduced mp basis (u, v) of g_t L and the integer matrix C with g_t B C = [u v]."""
        with mpmath.workprec(self.prec):
            tt = t if isinstance(t, mpmath.mpf) else to_mpf(t, self.prec)
            et, emt = mpmath.exp(tt), mpmath.exp(-tt)
            for _ in range(64):
                a, b, c, d = self._BC()
                u, v, Cr = gauss_reduce((et * a, emt * c), (et * b, emt * d))
                if Cr == [[1, 0], [0, 1]]:
                    break
                self.C = _mat_int_mul(self.C, Cr)
            else:
                raise DegenerateLattice("warm-started reduction did not settle")
            if not self.exact:
                cmax = max(abs(x) for row in self.C for x in row)
                err = mpmath.ldexp(self._scale * cmax * 4, -self.prec) * mpmath.exp(abs(tt))
                if err > mpmath.mpf(2) ** -8:
                    raise PrecisionError(
                        f"flow time {mpmath.nstr(tt, 6)} needs more than {self.prec} bits")
                self.max_error = max(self.max_error, err)
            return u, v, [row[:] for row in self.C]

    def at(self, t) -> OrbitSample:
        u, v, C = self.reduced_at(t)
        with mpmath.workprec(self.prec):
            sv = _shortest_from_reduced(u, v, C, self.norm, self.prec)
        tt = t if isinstance(t, mpmath.mpf) else to_mpf(t, self.prec)
        return OrbitSample(tt, sv.value, sv.witness)

    def grid(self, ts: Sequence) -> list[OrbitSample]:
        """Evaluate many times; the shortest-vector search is vectorized."""
        reduced = []
        with mpmath.workprec(self.prec):
            for t in ts:
                u, v, C = self.reduced_at(t)
                reduced.append((u, v, C))
            uf = np.array([[float(r[0][0]), float(r[0][1])] for r in reduced])
            vf = np.array([[float(r[1][0]), float(r[1][1])] for r in reduced])
            Cs = np.array([r[2] for r in reduced], dtype=object)
            ident = np.tile(np.eye(2, dtype=np.int64), (len(reduced), 1, 1))
            vals, wit = _lambda1_reduced_batch(uf, vf, ident, self.norm, max_bound=12)
            out = []
            for k, t in enumerate(ts):
                u, v, C = reduced[k]
                i, j = int(wit[k, 0]), int(wit[k, 1])
                w = (u[0] * i + v[0] * j, u[1] * i + v[1] * j)
                val = self.norm(w)
                wi = C[0][0] * i + C[0][1] * j
                wj = C[1][0] * i + C[1][1] * j
                if wj < 0 or (wj == 0 and wi < 0):
                    wi, wj = -wi, -wj
                tt = t if isinstance(t, mpmath.mpf) else to_mpf(t, self.prec)
                out.append(OrbitSample(tt, val, (wi, wj)))
        del Cs
        return out


def time_grid(t_lo, t_hi, step, prec: int | None = None) -> list[mpmath.mpf]:
    prec = prec or default_precision()
    with mpmath.workprec(prec):
        lo, hi, h = to_mpf(t_lo, prec), to_mpf(t_hi, prec), to_mpf(step, prec)
        if hi < lo:
            raise ValueError("t_lo must not exceed t_hi")
        if h <= 0:
            raise ValueError("step must be positive")
        n = int(mpmath.floor((hi - lo) / h + mpmath.mpf("1e-9")))
        return [lo + k * h for k in range(n + 1)]


def golden_section(f, a, b, maximize: bool = False, tol: float = 1e-12, max_iter: int = 200):
    """Golden-section search for a local extremum of f on [a, b]; returns (t, f(t))."""
    inv = (math.sqrt(5) - 1) / 2
    sgn = -1 if maximize else 1
    c = b - (b - a) * inv
    d = a + (b - a) * inv
    fc, fd = sgn * f(c), sgn * f(d)
    for _ in range(max_iter):
        if abs(b - a) < tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - (b - a) * inv
            fc = sgn * f(c)
        else:
            a, c, fc = c, d, fd
            d = a + (b - a) * inv
            fd = sgn * f(d)
    if fc < fd:
        return c, sgn * fc
    return d, sgn * fd


DIVERGENCE_THRESHOLD = 1e-3


@dataclass
class OrbitScan:
    samples: list[OrbitSample]
    inf: mpmath.mpf
    inf_t: mpmath.mpf
    sup: mpmath.mpf
    sup_t: mpmath.mpf
    refined_minima: list[OrbitSample] = field(default_factory=list)
    error_bound: mpmath.mpf = mpmath.mpf(0)
    divergence_suspected: bool = False
    note: str = ("finite-horizon grid heuristic: bounds on lambda_1 along the "
                 "sampled window only, not a proof of (non)divergence")

    def summary(self) -> dict:
        return {
            "inf": {"value": mpmath.nstr(self.inf, 17), "t": mpmath.nstr(self.inf_t, 12)},
            "sup": {"value": mpmath.nstr(self.sup, 17), "t": mpmath.nstr(self.sup_t, 12)},
            "error_bound": mpmath.nstr(self.error_bound, 3),
            "samples": len(self.samples),
            "refined_minima": [{"t": mpmath.nstr(s.t, 15), "lambda1": mpmath.nstr(s.lambda1, 17),
                                "witness": list(s.witness)} for s in self.refined_minima],
            "divergence_suspected": self.divergence_suspected,
            "divergence_threshold": DIVERGENCE_THRESHOLD,
            "note": self.note,
        }


def _local_extrema(values: Sequence, maximize: bool) -> list[int]:
    idx = []
    sgn = -1 if maximize else 1
    for k in range(1, len(values) - 1):
        if sgn * values[k] <= sgn * values[k - 1] and sgn * values[k] <= sgn * values[k + 1]:
            idx.append(k)
    return idx


def refine_extrema(ev: OrbitEvaluator, samples: list[OrbitSample], maximize: bool,
                   count: int | None, tol: float = 1e-12) -> list[OrbitSample]:
    """Golden-section refinement around grid-local extrema (best ``count`` first)."""
    if len(samples) < 3:
        return []
    vals = [float(s.lambda1) for s in samples]
    idx = _local_extrema(vals, maximize)
    idx.sort(key=lambda k: -vals[k] if maximize else vals[k])
    if count is not None:
        idx = idx[:count]
    out = []
    for k in idx:
        a, b = float(samples[k - 1].t), float(samples[k + 1].t)
        t_best, _ = golden_section(lambda t: float(ev.at(t).lambda1), a, b,
                                   maximize=maximize, tol=tol)
        out.append(ev.at(t_best))
    out.sort(key=lambda s: s.t)
    return out


def orbit_min_scan(lattice: PlanarLattice, norm, t_lo, t_hi, step, refine: int = 3,
                   prec: int | None = None) -> OrbitScan:
    """Sample lambda_1(g_t L) on a uniform grid, refining the lowest local minima.

    This is a finite-horizon heuristic: the grid infimum bounds nothing
    beyond the sampled window.
    """
    ev = OrbitEvaluator(lattice, norm, prec)
    ts = time_grid(t_lo, t_hi, step, ev.prec)
    samples = ev.grid(ts)
    refined = refine_extrema(ev, samples, maximize=False, count=refine) if refine else []
    pool = samples + refined
    lo = min(pool, key=lambda s: s.lambda1)
    hi = max(samples, key=lambda s: s.lambda1)
    return OrbitScan(samples, lo.lambda1, lo.t, hi.lambda1, hi.t, refined,
                     error_bound=ev.max_error,
                     divergence_suspected=lo.lambda1 < DIVERGENCE_THRESHOLD)


# -- export -----------------------------------------------------------------

def _digits(prec: int) -> int:
    return int(math.ceil(prec * math.log10(2))) + 2


def samples_to_csv(samples: Iterable[OrbitSample], prec: int | None = None) -> str:
    prec = prec or default_precision()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "lambda1", "i", "j"])
    nd = _digits(prec)
    for s in samples:
        w.writerow([mpmath.nstr(s.t, nd, min_fixed=-1, max_fixed=1),
                    mpmath.nstr(s.lambda1, nd, min_fixed=-1, max_fixed=1),
                    s.witness[0], s.witness[1]])
    return buf.getvalue()


def samples_from_csv(text: str, prec: int | None = None) -> list[OrbitSample]:
    prec = prec or default_precision()
    rows = list(csv.DictReader(io.StringIO(text)))
    with mpmath.workprec(prec):
        return [OrbitSample(mpmath.mpf(r["t"]), mpmath.mpf(r["lambda1"]),
                            (int(r["i"]), int(r["j"]))) for r in rows]


def samples_to_json(samples: Iterable[OrbitSample]) -> str:
    return json.dumps([{"t": number_to_json(s.t), "lambda1": number_to_json(s.lambda1),
                        "i": s.witness[0], "j": s.witness[1]} for s in samples])
