"""Norm bodies on the plane, critical radii and loci, norm conjugation and a
finite-horizon Dirichlet-improvability tester."""
from __future__ import annotations

import itertools
import math
import threading
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np
from scipy.optimize import minimize

from .flow import (GroupElement, OrbitEvaluator, PlanarLattice, golden_section, gauss_reduce,
                   lambda1_batch, lattice_from_alpha, mat_mul, shortest_vector, time_grid,
                   _local_extrema)
from .scalars import (QuadraticSurd, default_precision, is_exact, number_from_json,
                      number_to_json, parse_number, to_mpf)


class CriticalRadiusMissing(RuntimeError):
    pass


class OptimizerError(RuntimeError):
    pass


@dataclass(frozen=True)
class OptimizerConfig:
    grid: int = 48
    iterations: int = 200
    restarts: int = 8
    seed: int = 0
    error_floor: float = 1e-9


@dataclass
class CriticalData:
    r_hat: mpmath.mpf
    error_bound: float
    argmax: PlanarLattice
    params: tuple[float, float, float] | None = None   # (x, t, theta) of the argmax
    config: OptimizerConfig | None = None
    grid_max: float | None = None
    lipschitz: float | None = None
    source: str = "optimizer"

    def to_json(self) -> dict:
        return {"r_hat": mpmath.nstr(self.r_hat, 15), "error_bound": self.error_bound,
                "argmax": self.argmax.to_json(), "params": self.params,
                "config": asdict(self.config) if self.config else None,
                "grid_max": self.grid_max, "lipschitz": self.lipschitz, "source": self.source}


# -- norm bodies --------------------------------------------------------------

class NormBody:
    """A symmetric convex norm. ``__call__`` evaluates one vector in mpmath
    (or exactly, where the kind allows); ``batch`` evaluates float arrays whose
    last axis has length 2."""

    kind = "abstract"

    def __init__(self):
        self._equiv = None
        self._lock = threading.Lock()
        self._critical: CriticalData | None = None
        self._grid_cache = None
        self._locus_cache: dict = {}

    def __call__(self, v):
        raise NotImplementedError

    def batch(self, arr: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def equivalence_constants(self) -> tuple[float, float]:
        """(c_lo, c_hi) with c_lo |v| <= nu(v) <= c_hi |v|, from 4096 unit-circle
        samples widened by a safety factor 2."""
        if self._equiv is None:
            ang = np.linspace(0.0, math.pi, 4096, endpoint=False)
            vals = self.batch(np.stack([np.cos(ang), np.sin(ang)], axis=-1))
            self._equiv = (float(vals.min()) / 2.0, float(vals.max()) * 2.0)
        return self._equiv

    @property
    def critical(self) -> CriticalData:
        if self._critical is None:
            raise CriticalRadiusMissing(f"critical radius of the {self.kind} norm not computed yet")
        return self._critical

    @property
    def has_critical(self) -> bool:
        return self._critical is not None

    def set_critical(self, data: CriticalData) -> CriticalData:
        """Write-once: the first stored value wins."""
        with self._lock:
            if self._critical is None:
                self._critical = data
            return self._critical

    def to_json(self) -> dict:
        return {"kind": self.kind}


class SupNorm(NormBody):
    kind = "sup"

    def __call__(self, v):
        x, y = v
        return max(abs(x), abs(y))

    def batch(self, arr):
        return np.max(np.abs(arr), axis=-1)


class EuclideanNorm(NormBody):
    kind = "euclidean"

    def __call__(self, v):
        x, y = v
        if is_exact(x) and is_exact(y):
            x, y = to_mpf(x), to_mpf(y)
        return mpmath.sqrt(x * x + y * y)

    def batch(self, arr):
        return np.hypot(arr[..., 0], arr[..., 1])


class PNorm(NormBody):
    kind = "pnorm"

    def __init__(self, p: float):
        super().__init__()
        if not p >= 1:
            raise ValueError("p-norms need p >= 1")
        self.p = p

    def __call__(self, v):
        x, y = (to_mpf(c) if not isinstance(c, mpmath.mpf) else c for c in v)
        p = mpmath.mpf(self.p)
        return (abs(x) ** p + abs(y) ** p) ** (1 / p)

    def batch(self, arr):
        a = np.abs(arr)
        m = np.maximum(a[..., 0], a[..., 1])
        safe = np.where(m > 0, m, 1.0)
        s = (a[..., 0] / safe) ** self.p + (a[..., 1] / safe) ** self.p
        return np.where(m > 0, m * s ** (1.0 / self.p), 0.0)

    def to_json(self):
        return {"kind": self.kind, "p": self.p}


class PolygonNorm(NormBody):
    """Gauge of a centrally symmetric convex polygon: max_k <v, n_k> / h_k over
    the edge normals. Exact on exact vertex data."""

    kind = "polygon"

    def __init__(self, vertices: Sequence[Sequence]):
        super().__init__()
        verts = [tuple(_as_number(c) for c in v) for v in vertices]
        if len(verts) < 4 or len(verts) % 2:
            raise ValueError("a symmetric polygon needs an even number (>= 4) of vertices")
        n = len(verts)
        half = n // 2
        for k in range(half):
            a, b = verts[k], verts[k + half]
            if not (_close(a[0], -b[0]) and _close(a[1], -b[1])):
                raise ValueError("polygon vertices must be listed in order and centrally symmetric")
        turns = []
        for k in range(n):
            p, q, r = verts[k], verts[(k + 1) % n], verts[(k + 2) % n]
            turns.append((q[0] - p[0]) * (r[1] - q[1]) - (q[1] - p[1]) * (r[0] - q[0]))
        if all(t < 0 for t in turns):
            verts = verts[::-1]
        elif not all(t > 0 for t in turns):
            raise ValueError("polygon vertices must form a strictly convex polygon")
        self.vertices = verts
        normals = []
        for k in range(n):
            p, q = verts[k], verts[(k + 1) % n]
            nx, ny = q[1] - p[1], -(q[0] - p[0])
            h = p[0] * nx + p[1] * ny
            normals.append((nx / h, ny / h))
        self.normals = normals
        self._mp_normals: dict[int, list] = {}
        self._np_normals = np.array([[float(a), float(b)] for a, b in normals])

    def _normals_at(self, prec: int):
        if prec not in self._mp_normals:
            self._mp_normals[prec] = [(to_mpf(a, prec), to_mpf(b, prec)) for a, b in self.normals]
        return self._mp_normals[prec]

    def __call__(self, v):
        x, y = v
        if is_exact(x) and is_exact(y) and all(is_exact(c) for nrm in self.normals for c in nrm):
            return max(abs(x * a + y * b) for a, b in self.normals)
        if is_exact(x):
            x = to_mpf(x)
        if is_exact(y):
            y = to_mpf(y)
        nrm = self._normals_at(mpmath.mp.prec)
        return max(abs(x * a + y * b) for a, b in nrm)

    def batch(self, arr):
        return np.max(np.abs(arr @ self._np_normals.T), axis=-1)

    def to_json(self):
        return {"kind": self.kind, "vertices": [[number_to_json(c) for c in v] for v in self.vertices]}


class ConjugatedNorm(NormBody):
    """v -> base(g^{-1} v)."""

    kind = "conjugated"

    def __init__(self, base: NormBody, g: GroupElement):
        super().__init__()
        self.base = base
        self.g = g
        self.g_inv = g.inverse()
        self._ginv_np = self.g_inv.to_float()

    def __call__(self, v):
        (a, b), (c, d) = self.g_inv.matrix
        x, y = v
        if not (is_exact(x) and is_exact(y) and all(is_exact(e) for e in (a, b, c, d))):
            x, y, a, b, c, d = (e if isinstance(e, mpmath.mpf) else to_mpf(e, mpmath.mp.prec)
                                for e in (x, y, a, b, c, d))
        return self.base((a * x + b * y, c * x + d * y))

    def batch(self, arr):
        return self.base.batch(arr @ self._ginv_np.T)

    def to_json(self):
        return {"kind": self.kind, "base": self.base.to_json(),
                "g": [[number_to_json(e) for e in row] for row in self.g.matrix]}


def _as_number(c):
    if isinstance(c, (int, Fraction, QuadraticSurd, mpmath.mpf)):
        return Fraction(c) if isinstance(c, int) else c
    if isinstance(c, float):
        return mpmath.mpf(c)
    if isinstance(c, str):
        return parse_number(c)
    if isinstance(c, dict):
        return number_from_json(c)
    raise TypeError(f"cannot read a coordinate from {c!r}")


def _close(a, b) -> bool:
    if is_exact(a) and is_exact(b):
        return a == b
    return abs(to_mpf(a) - to_mpf(b)) < mpmath.mpf(2) ** -40


def regular_hexagon() -> PolygonNorm:
    """Hexagon with vertices at angles k*pi/3 and unit circumradius (exact in Q(sqrt3))."""
    h = QuadraticSurd.make(0, 1, 2, 3)          # sqrt(3)/2
    half = Fraction(1, 2)
    one = Fraction(1)
    return PolygonNorm([(one, Fraction(0)), (half, h), (-half, h),
                        (-one, Fraction(0)), (-half, -h), (half, -h)])


def hexagon_tiling_lattice(prec: int | None = None) -> PlanarLattice:
    """Unimodular rescaling of the lattice of centres of a tiling by half-size
    regular hexagons (for the vertex set of :func:`regular_hexagon`). It
    touches the hexagon's boundary at six edge midpoints; used as an
    independent check on the optimizer."""
    prec = prec or default_precision()
    with mpmath.workprec(prec):
        s3 = mpmath.sqrt(3)
        scale = mpmath.sqrt(8 / (3 * s3))
        return PlanarLattice(((scale * mpmath.mpf(3) / 4, mpmath.mpf(0)),
                              (scale * s3 / 4, scale * s3 / 2)), "hexagon-tiling")


def norm_from_json(obj: dict) -> NormBody:
    kind = obj["kind"]
    if kind == "sup":
        return SupNorm()
    if kind == "euclidean":
        return EuclideanNorm()
    if kind == "pnorm":
        return PNorm(float(obj["p"]))
    if kind == "hexagon":
        return regular_hexagon()
    if kind == "polygon":
        return PolygonNorm(obj["vertices"])
    if kind == "conjugated":
        rows = [[_as_number(e) for e in row] for row in obj["g"]]
        return conjugate_norm(norm_from_json(obj["base"]), GroupElement.from_matrix(rows))
    raise ValueError(f"unknown norm kind {kind!r}")


def norm_by_name(name: str) -> NormBody:
    return norm_from_json({"kind": name})


# -- the lattice family R(theta) g_t u_x Z^2 ----------------------------------

def family_bases(x, t, theta) -> np.ndarray:
    """Float bases (columns are basis vectors) of R(theta) g_t u_x Z^2, broadcast."""
    x, t, theta = np.broadcast_arrays(np.asarray(x, float), np.asarray(t, float),
                                      np.asarray(theta, float))
    c, s = np.cos(theta), np.sin(theta)
    et, emt = np.exp(t), np.exp(-t)
    out = np.empty(x.shape + (2, 2))
    out[..., 0, 0] = c * et
    out[..., 0, 1] = c * x * et - s * emt
    out[..., 1, 0] = s * et
    out[..., 1, 1] = s * x * et + c * emt
    return out


def family_lattice(x: float, t: float, theta: float, prec: int | None = None) -> PlanarLattice:
    """The same lattice built in mpmath from float parameters (det 1 to working precision)."""
    prec = prec or default_precision()
    with mpmath.workprec(prec):
        xm, tm, thm = mpmath.mpf(x), mpmath.mpf(t), mpmath.mpf(theta)
        c, s = mpmath.cos(thm), mpmath.sin(thm)
        et, emt = mpmath.exp(tm), mpmath.exp(-tm)
        B = ((c * et, c * xm * et - s * emt), (s * et, s * xm * et + c * emt))
        return PlanarLattice(B, f"family(x={x:.6g},t={t:.6g},theta={theta:.6g})")


def t_cap(norm: NormBody) -> float:
    """Upper end of the flow parameter in the search family.

    Every lattice has a representative with t = log|w| for any primitive w.
    For a critical lattice either its shortest vector has length >= 1 (then
    t <= log of the Hermite bound, below the cap) or its second minimum
    l2 > 1 satisfies l2 <= (2/sqrt3)/l1 and l1 >= r/c_hi >= c_lo (2/sqrt3)^(1/2)/c_hi,
    so l2 <= 4 c_hi/c_lo.
    """
    c_lo, c_hi = norm.equivalence_constants()
    return math.log(4.0 * c_hi / c_lo)


def _lambda1_at(norm: NormBody, p: np.ndarray) -> float:
    x, t, th = p
    vals, _ = lambda1_batch(family_bases(x, t, th)[None], norm)
    return float(vals[0])


def _wrap(p: np.ndarray, cap: float) -> np.ndarray:
    return np.array([p[0] % 1.0, min(max(p[1], 0.0), cap), p[2] % math.pi])


def _nelder_mead(norm: NormBody, start: np.ndarray, scale: np.ndarray, cap: float,
                 iterations: int, fixed_theta: float | None = None):
    """Maximize lambda_1 over the family from ``start``; returns (point, value, diameter)."""
    if fixed_theta is None:
        def f(p):
            return -_lambda1_at(norm, _wrap(p, cap))
        simplex = np.vstack([start] + [start + np.eye(3)[k] * scale[k] for k in range(3)])
    else:
        def f(p):
            return -_lambda1_at(norm, _wrap(np.array([p[0], p[1], fixed_theta]), cap))
        start = start[:2]
        simplex = np.vstack([start] + [start + np.eye(2)[k] * scale[k] for k in range(2)])
    res = minimize(f, start, method="Nelder-Mead",
                   options={"maxiter": iterations, "initial_simplex": simplex,
                            "xatol": 1e-13, "fatol": 1e-15})
    sim = res.final_simplex[0]
    diam = float(max(np.max(np.abs(a - b)) for a, b in itertools.combinations(sim, 2)))
    p = res.x if fixed_theta is None else np.array([res.x[0], res.x[1], fixed_theta])
    return _wrap(p, cap), -float(res.fun), diam


def _grid_values(norm: NormBody, n: int, cap: float):
    xs = np.linspace(0.0, 1.0, n)
    ts = np.linspace(0.0, cap, n)
    ths = np.linspace(0.0, math.pi, n, endpoint=False)
    X, T, TH = np.meshgrid(xs, ts, ths, indexing="ij")
    bases = family_bases(X, T, TH).reshape(-1, 2, 2)
    vals = np.empty(len(bases))
    chunk = 20_000
    for s in range(0, len(bases), chunk):
        vals[s:s + chunk], _ = lambda1_batch(bases[s:s + chunk], norm)
    return xs, ts, ths, vals.reshape(n, n, n)


def critical_radius(norm: NormBody, opt: OptimizerConfig | None = None) -> CriticalData:
    """Estimate r_nu = max lambda_1 over unimodular lattices.

    A coarse grid over (x, t, theta) is followed by Nelder-Mead restarts from the
    best grid-local maxima. The error bound is the grid Lipschitz estimate times
    the final simplex diameter (floored); it is an estimate, not a proof.
    Results are cached write-once on the norm.
    """
    if norm.has_critical:
        return norm.critical
    opt = opt or OptimizerConfig()
    cap = t_cap(norm)
    xs, ts, ths, vals = _grid_values(norm, opt.grid, cap)
    steps = np.array([xs[1] - xs[0], ts[1] - ts[0], ths[1] - ths[0]])
    lip = 0.0
    for axis in range(3):
        d = np.abs(np.diff(vals, axis=axis)).max() / steps[axis]
        lip = max(lip, float(d))
    norm._grid_cache = (xs, ts, ths, vals, lip)

    flat = np.argsort(-vals, axis=None, kind="stable")
    starts = []
    for idx in flat:
        i, j, k = np.unravel_index(idx, vals.shape)
        p = np.array([xs[i], ts[j], ths[k]])
        if all(np.max(np.abs(p - q) / steps) > 2 for q in starts):
            starts.append(p)
        if len(starts) >= opt.restarts:
            break
    best = None
    for p0 in starts:
        p, val, diam = _nelder_mead(norm, p0, steps / 2, cap, opt.iterations)
        if best is None or val > best[1]:
            best = (p, val, diam)
    p, val, diam = best
    if diam > 1e-3:
        raise OptimizerError(f"simplex failed to contract (diameter {diam:.3g})")
    grid_best = float(vals.max())
    if grid_best > val:
        i, j, k = np.unravel_index(int(vals.argmax()), vals.shape)
        p, val, diam = np.array([xs[i], ts[j], ths[k]]), grid_best, 0.0
    lattice = family_lattice(*p)
    with mpmath.workprec(default_precision()):
        r = shortest_vector(lattice, norm).value
    err = max(opt.error_floor, lip * diam)
    data = CriticalData(r, err, lattice, tuple(float(c) for c in p), opt, grid_best, lip)
    return norm.set_critical(data)


# -- lattice comparison -------------------------------------------------------

def _reduced_float(B: np.ndarray):
    u, v, _ = gauss_reduce((B[0, 0], B[1, 0]), (B[0, 1], B[1, 1]))
    u, v = np.array(u, float), np.array(v, float)
    if u[0] * v[1] - u[1] * v[0] < 0:
        v = -v
    return u, v


def _candidate_bases(B: np.ndarray, slack: float = 0.02) -> list[np.ndarray]:
    u, v = _reduced_float(B)
    vecs = [i * u + j * v for i in range(-2, 3) for j in range(-2, 3) if (i, j) != (0, 0)]
    l1 = min(np.hypot(*w) for w in vecs)
    short = [w for w in vecs if np.hypot(*w) <= l1 * (1 + slack)]
    l2 = np.hypot(*v)
    second = [w for w in vecs if np.hypot(*w) <= l2 * (1 + slack)]
    out = []
    for a in short:
        for b in second:
            if abs(a[0] * b[1] - a[1] * b[0] - 1) < 1e-6:
                out.append(np.column_stack([a, b]))
    return out


def lattice_distance(A: PlanarLattice | np.ndarray, B: PlanarLattice | np.ndarray) -> float:
    """Entrywise max distance between reduced bases, minimized over the
    reduced-basis ambiguity of B (ties among shortest vectors, signs)."""
    Af = A.to_float() if isinstance(A, PlanarLattice) else np.asarray(A, float)
    Bf = B.to_float() if isinstance(B, PlanarLattice) else np.asarray(B, float)
    ua, va = _reduced_float(Af)
    Ared = np.column_stack([ua, va])
    return float(min(np.max(np.abs(Ared - C)) for C in _candidate_bases(Bf)))


def cluster_diameter(lattices: Sequence[PlanarLattice]) -> float:
    if len(lattices) < 2:
        return 0.0
    return max(max(lattice_distance(a, b), lattice_distance(b, a))
               for a, b in itertools.combinations(lattices, 2))


# -- locus --------------------------------------------------------------------

def locus_sample(norm: NormBody, tol: float = 1e-3, n_theta: int = 96,
                 dedupe: float = 1e-4) -> list[PlanarLattice]:
    """Lattices of the search family with lambda_1 >= r_hat - tol, de-duplicated
    up to ``dedupe`` in :func:`lattice_distance`, each re-verified in mpmath."""
    data = norm.critical
    key = (tol, n_theta, dedupe)
    if key in norm._locus_cache:
        return norm._locus_cache[key]
    if isinstance(norm, ConjugatedNorm) and data.source == "conjugated":
        out = [norm.g @ L for L in locus_sample(norm.base, tol, n_theta, dedupe)]
        norm._locus_cache[key] = out
        return out
    if norm._grid_cache is None:
        opt = data.config or OptimizerConfig()
        cap = t_cap(norm)
        xs, ts, ths, vals = _grid_values(norm, opt.grid, cap)
        norm._grid_cache = (xs, ts, ths, vals, None)
    xs, ts, ths, vals, _ = norm._grid_cache
    cap = t_cap(norm)
    steps = np.array([xs[1] - xs[0], ts[1] - ts[0], math.pi / n_theta])
    r = float(data.r_hat)
    cands: list[tuple[float, np.ndarray]] = []
    if data.params is not None:
        cands.append((r, np.array(data.params)))
    for idx in np.argwhere(vals >= r - tol):
        i, j, k = idx
        cands.append((float(vals[i, j, k]), np.array([xs[i], ts[j], ths[k]])))
    # per-slice refinement in (x, t)
    grid_th = ths
    for th in np.linspace(0.0, math.pi, n_theta, endpoint=False):
        k = int(np.argmin(np.abs(grid_th - th)))
        sl = vals[:, :, k]
        i, j = np.unravel_index(int(sl.argmax()), sl.shape)
        if sl[i, j] < r - 20 * tol - 0.2:
            continue
        p, val, _ = _nelder_mead(norm, np.array([xs[i], ts[j], th]), steps / 2, cap,
                                 200, fixed_theta=th)
        cands.append((val, p))
    kept: list[PlanarLattice] = []
    for val, p in sorted(cands, key=lambda c: -c[0]):
        if val < r - tol:
            continue
        L = family_lattice(*p)
        with mpmath.workprec(default_precision()):
            lam = shortest_vector(L, norm).value
        if lam < r - tol:
            continue
        if all(lattice_distance(L, K) > dedupe for K in kept):
            kept.append(L)
    if not kept:
        raise ValueError(f"no lattice within tol={tol} of r_hat; tol may be below the error bound "
                         f"{data.error_bound:.3g}")
    norm._locus_cache[key] = kept
    return kept


# -- conjugation --------------------------------------------------------------

def conjugate_norm(norm: NormBody, g: GroupElement) -> ConjugatedNorm:
    """nu' = nu o g^{-1}; its critical locus is g times the locus of nu."""
    out = ConjugatedNorm(norm, g)
    if norm.has_critical:
        d = norm.critical
        out.set_critical(CriticalData(d.r_hat, d.error_bound, g @ d.argmax, None, d.config,
                                      d.grid_max, d.lipschitz, source="conjugated"))
    return out


def conjugating_element(source: PlanarLattice, target: PlanarLattice) -> GroupElement:
    """g = B_target B_source^{-1}, so that g * source = target."""
    (a, b), (c, d) = source.basis
    inv = ((d, -b), (-c, a))
    return GroupElement(mat_mul(target.basis, inv), "conj")


# -- Dirichlet improvability --------------------------------------------------

@dataclass
class DIVerdict:
    verdict: str
    sup_tail: mpmath.mpf | None
    sup_t: mpmath.mpf | None
    margin: mpmath.mpf | None
    c_estimate: mpmath.mpf | None
    r_hat: mpmath.mpf | None
    delta: float | None
    hits: list = field(default_factory=list)
    windows_hit: int = 0
    thresholds: dict = field(default_factory=dict)
    reason: str = ""

    def to_json(self) -> dict:
        def s(v):
            return None if v is None else mpmath.nstr(v, 15)
        return {"verdict": self.verdict, "sup_tail": s(self.sup_tail), "sup_t": s(self.sup_t),
                "margin": s(self.margin), "c_estimate": s(self.c_estimate),
                "r_hat": s(self.r_hat), "delta": self.delta, "hit_count": len(self.hits),
                "hit_times": [mpmath.nstr(t, 10) for t in self.hits],
                "windows_hit": self.windows_hit, "thresholds": self.thresholds,
                "reason": self.reason}


def di_test(alpha, norm: NormBody, t0, t_max, step, hit_count: int = 10, windows: int = 10,
            min_windows: int = 5, delta_factor: float = 3.0, refine: bool = True,
            prec: int | None = None) -> DIVerdict:
    """Finite-horizon test of nu-Dirichlet improvability of alpha.

    Rationals are improvable outright (their orbit leaves every compact set).
    The critical radius is computed with default settings when missing. Otherwise lambda_1(g_t Lambda_alpha) is sampled on [t0, t_max] and its local
    maxima refined; the verdict compares the tail supremum with r_hat - delta,
    delta = delta_factor * error_bound. Both non-exact verdicts are heuristics.
    """
    if to_mpf(t0) >= to_mpf(t_max):
        raise ValueError("t0 must be below t_max")
    thresholds = {"delta_factor": delta_factor, "hit_count": hit_count, "windows": windows,
                  "min_windows": min_windows, "t0": str(t0), "t_max": str(t_max),
                  "step": str(step)}
    if isinstance(alpha, (int, Fraction)):
        return DIVerdict("improvable", None, None, None, None, None, None, thresholds=thresholds,
                         reason="rational alpha: the orbit diverges, so it eventually avoids "
                                "any neighbourhood of the critical locus")
    data = norm.critical if norm.has_critical else critical_radius(norm)
    r = data.r_hat
    delta = delta_factor * data.error_bound
    ev = OrbitEvaluator(lattice_from_alpha(alpha), norm, prec)
    samples = ev.grid(time_grid(t0, t_max, step, ev.prec))
    pool = list(samples)
    if refine:
        vals = [float(s.lambda1) for s in samples]
        for k in _local_extrema(vals, maximize=True):
            a, b = float(samples[k - 1].t), float(samples[k + 1].t)
            tb, _ = golden_section(lambda t: float(ev.at(t).lambda1), a, b, maximize=True)
            pool.append(ev.at(tb))
    top = max(pool, key=lambda s: s.lambda1)
    s_star = top.lambda1
    hits = sorted({s.t for s in pool if s.lambda1 >= r - delta})
    lo, hi = float(to_mpf(t0)), float(to_mpf(t_max))
    width = (hi - lo) / windows
    windows_hit = len({min(int((float(t) - lo) / width), windows - 1) for t in hits})
    margin = r - s_star
    if s_star <= r - delta:
        verdict, c_est = "improvable (heuristic)", s_star / r
    elif len(hits) >= hit_count and windows_hit >= min_windows:
        verdict, c_est = "non-improvable (heuristic)", None
    else:
        verdict, c_est = "inconclusive", None
    return DIVerdict(verdict, s_star, top.t, margin, c_est, r, delta, hits, windows_hit,
                     thresholds, reason="finite-horizon grid heuristic")
