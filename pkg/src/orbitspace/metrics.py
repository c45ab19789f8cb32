"""Distances between elliptic orbits parametrized by eccentric anomaly.

An orbit with marked pericenter is the curve ``Q(u) = A + B cos u + C sin u``
(focus at the origin, pericenter at ``u = 0``). Two distance families are
implemented:

``rho_star``
    p-mean over ``u`` of ``|Q1(u) - Q2(u)|`` (max for ``p = inf``).
``rho``
    the same quantity minimized over a phase shift ``s`` of the second orbit,
    which forgets the pericenter mark.

The numerical routines work on stacks of orbit pairs so that large
property checks and distance matrices stay cheap; every row is computed
independently, so batched and single-pair results are bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import EllipticOrbit, OrbitError

TWO_PI = 2.0 * math.pi
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

COARSE_NODES = 128
# shift-grid cells on each side of a coarse minimum searched by golden section
BRACKET_CELLS = 2
MAX_DOUBLINGS = 8
NEWTON_STEPS = 8
MAX_WALKS = 8
# cap on elements per temporary array when scanning the shift grid
_CHUNK = 1 << 21


@dataclass(frozen=True)
class EllipseFrame:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def point(self, u):
        u = np.asarray(u, dtype=float)
        return self.A + np.multiply.outer(np.cos(u), self.B) + np.multiply.outer(np.sin(u), self.C)


@dataclass(frozen=True)
class MetricSpec:
    p: float = 2.0
    n_u: int = 512
    n_s: int = 256
    refine_tol: float = 1e-10

    def __post_init__(self):
        p = parse_exponent(self.p)
        object.__setattr__(self, "p", p)
        if self.n_u < 16 or self.n_s < 16:
            raise ValueError("n_u and n_s must be at least 16")
        if self.n_u & (self.n_u - 1):
            raise ValueError(f"n_u must be a power of two, got {self.n_u}")
        if not self.refine_tol > 0:
            raise ValueError("refine_tol must be positive")


@dataclass(frozen=True)
class DistanceResult:
    value: float
    argmin_shift: float | None
    estimated_error: float


def parse_exponent(p):
    if isinstance(p, str):
        p = math.inf if p.strip().lower() in ("inf", "infinity", "oo") else float(p)
    p = float(p)
    if not p >= 1:
        raise ValueError(f"exponent p must be >= 1, got {p}")
    return p


def ellipse_frame(orb):
    a = orb.semi_major_axis
    ecc = orb.emag
    pdir = orb.edir
    normal = np.cross(orb.c, pdir)
    qdir = normal / np.linalg.norm(normal)
    B = a * pdir
    return EllipseFrame(-ecc * B, B, a * math.sqrt(1.0 - ecc * ecc) * qdir)


def _stack(orbits):
    frames = [ellipse_frame(o) for o in orbits]
    return (
        np.array([f.A for f in frames]).reshape(-1, 3),
        np.array([f.B for f in frames]).reshape(-1, 3),
        np.array([f.C for f in frames]).reshape(-1, 3),
    )


def _check_pairs(o1s, o2s):
    if len(o1s) != len(o2s):
        raise ValueError("orbit lists must have the same length")
    for x, y in zip(o1s, o2s):
        if not (isinstance(x, EllipticOrbit) and isinstance(y, EllipticOrbit)):
            raise TypeError("distances are defined for EllipticOrbit instances")
        if x.kappa2 != y.kappa2:
            raise OrbitError(f"kappa2 mismatch: {x.kappa2} vs {y.kappa2}")


class _Pairs:
    """Frames of N orbit pairs; ``Q1(u) - Q2(u + s) = D + X(s) cos u + Y(s) sin u``."""

    def __init__(self, A1, B1, C1, A2, B2, C2):
        self.D = A1 - A2
        self.B1, self.C1, self.B2, self.C2 = B1, C1, B2, C2
        scale = np.maximum(np.linalg.norm(B1, axis=1), np.linalg.norm(B2, axis=1))
        self.scale = np.maximum(scale, 1.0)

    @classmethod
    def from_orbits(cls, o1s, o2s):
        return cls(*_stack(o1s), *_stack(o2s))

    def __len__(self):
        return len(self.D)

    def take(self, idx):
        new = object.__new__(_Pairs)
        for name in ("D", "B1", "C1", "B2", "C2", "scale"):
            setattr(new, name, getattr(self, name)[idx])
        return new

    def xy(self, s):
        """X, Y of shape ``s.shape + (3,)``; rows of ``s`` index pairs."""
        cs = np.cos(s)[..., None]
        sn = np.sin(s)[..., None]
        extra = (slice(None),) + (None,) * (np.ndim(s) - 1)
        B1, C1, B2, C2 = (m[extra] for m in (self.B1, self.C1, self.B2, self.C2))
        X = B1 - (B2 * cs + C2 * sn)
        Y = C1 - (C2 * cs - B2 * sn)
        return X, Y

    def dist2(self, s, n):
        """Squared pointwise distances on an ``n``-node u-grid; shape ``s.shape + (n,)``."""
        u = TWO_PI * np.arange(n) / n
        cu, su = np.cos(u), np.sin(u)
        X, Y = self.xy(s)
        extra = (slice(None),) + (None,) * (np.ndim(s) - 1)
        D = self.D[extra]
        out = None
        for j in range(3):
            w = D[..., j, None] + X[..., j, None] * cu + Y[..., j, None] * su
            out = w * w if out is None else out + w * w
        return out


def _pmean(d2, p):
    if p == 2.0:
        return np.sqrt(np.mean(d2, axis=-1))
    if p == 1.0:
        return np.mean(np.sqrt(d2), axis=-1)
    return np.mean(d2 ** (0.5 * p), axis=-1) ** (1.0 / p)


def _w_and_derivs(D, X, Y, u):
    cu, su = np.cos(u)[:, None], np.sin(u)[:, None]
    W = D + X * cu + Y * su
    W1 = Y * cu - X * su
    W2 = -(X * cu + Y * su)
    return W, W1, W2


def _refine_max(D, X, Y, u0, half_width):
    """Newton iterations on ``|W(u)|^2`` started at grid maxima, kept inside the bracket."""
    u = u0.copy()
    W, _, _ = _w_and_derivs(D, X, Y, u)
    f0 = np.einsum("ij,ij->i", W, W)
    best = f0
    change = np.zeros_like(f0)
    for _ in range(NEWTON_STEPS):
        W, W1, W2 = _w_and_derivs(D, X, Y, u)
        g = 2.0 * np.einsum("ij,ij->i", W, W1)
        curv = 2.0 * (np.einsum("ij,ij->i", W1, W1) + np.einsum("ij,ij->i", W, W2))
        step = np.where(curv < 0, -g / np.where(curv < 0, curv, -1.0), 0.0)
        u = np.clip(u + step, u0 - half_width, u0 + half_width)
        W, _, _ = _w_and_derivs(D, X, Y, u)
        f = np.einsum("ij,ij->i", W, W)
        change = np.abs(f - best)
        best = np.maximum(best, f)
    return best, change


def _two_extrema(values, largest):
    """Indices of the best and second-best periodic local extrema along the last axis."""
    v = values if largest else -values
    mask = (v >= np.roll(v, 1, axis=-1)) & (v >= np.roll(v, -1, axis=-1))
    masked = np.where(mask, v, -np.inf)
    first = np.argmax(masked, axis=-1)
    rows = np.arange(len(v))
    masked[rows, first] = -np.inf
    second = np.argmax(masked, axis=-1)
    second = np.where(np.isfinite(masked[rows, second]), second, first)
    return first, second


def _max_dist(pairs, s, n):
    """``max_u |Q1(u) - Q2(u + s)|`` for one shift per pair; returns (value, error estimate)."""
    d2 = pairs.dist2(s, n)
    i1, i2 = _two_extrema(d2, largest=True)
    X, Y = pairs.xy(s)
    half = TWO_PI / n
    f1, e1 = _refine_max(pairs.D, X, Y, TWO_PI * i1 / n, half)
    f2, e2 = _refine_max(pairs.D, X, Y, TWO_PI * i2 / n, half)
    f = np.maximum(f1, f2)
    err = np.where(f1 >= f2, e1, e2)
    value = np.sqrt(f)
    return value, np.sqrt(f + err) - value


def _objective(pairs, s, p, n):
    """Shift objective; ``n`` is a node count, or one node count per row."""
    if math.isinf(p):
        return _max_dist(pairs, s, n)[0]
    if np.ndim(n) == 0:
        return _pmean(pairs.dist2(s, n), p)
    out = np.empty(len(pairs))
    for m in np.unique(n):
        rows = np.flatnonzero(n == m)
        out[rows] = _pmean(pairs.take(rows).dist2(s[rows], int(m)), p)
    return out


def _doubling(pairs, s, p, n, tol):
    """Trapezoid p-means with node doubling until two successive results agree.

    Returns (value, error estimate, node count) per row.
    """
    value = _pmean(pairs.dist2(s, n), p)
    error = np.full(len(pairs), np.inf)
    nodes = np.full(len(pairs), n)
    todo = np.arange(len(pairs))
    for _ in range(MAX_DOUBLINGS):
        n *= 2
        new = _pmean(pairs.take(todo).dist2(s[todo], n), p)
        change = np.abs(new - value[todo])
        value[todo] = new
        error[todo] = change
        # converged rows keep the smaller count, which already met the tolerance
        todo = todo[change > tol * (1.0 + new)]
        nodes[todo] = n
        if todo.size == 0:
            break
    return value, error, nodes


def _converged_value(pairs, s, spec):
    """Value at fixed shifts with node doubling (p < inf) or refined max (p = inf)."""
    if math.isinf(spec.p):
        return _max_dist(pairs, s, spec.n_u)
    value, error, _ = _doubling(pairs, s, spec.p, spec.n_u, spec.refine_tol)
    return value, error


def _golden(pairs, lo, hi, p, n, xtol):
    """Batched golden-section minimization; each row stops after its own iteration count."""
    width = hi - lo
    iters = np.ceil(np.log(xtol / width) / math.log(INV_PHI)).astype(int)
    iters = np.maximum(iters, 1)
    c = hi - INV_PHI * width
    d = lo + INV_PHI * width
    fc = _objective(pairs, c, p, n)
    fd = _objective(pairs, d, p, n)
    best_x = np.where(fc <= fd, c, d)
    best_f = np.minimum(fc, fd)
    for k in range(int(iters.max())):
        active = k < iters
        left = fc < fd
        new_lo = np.where(left, lo, c)
        new_hi = np.where(left, d, hi)
        x = np.where(left, new_hi - INV_PHI * (new_hi - new_lo), new_lo + INV_PHI * (new_hi - new_lo))
        fx = _objective(pairs, x, p, n)
        new_c = np.where(left, x, d)
        new_fc = np.where(left, fx, fd)
        new_d = np.where(left, c, x)
        new_fd = np.where(left, fc, fx)
        lo = np.where(active, new_lo, lo)
        hi = np.where(active, new_hi, hi)
        c = np.where(active, new_c, c)
        d = np.where(active, new_d, d)
        fc = np.where(active, new_fc, fc)
        fd = np.where(active, new_fd, fd)
        better = active & (fx < best_f)
        best_x = np.where(better, x, best_x)
        best_f = np.where(better, fx, best_f)
    return best_x, best_f


def _parabolic_max(d2):
    """Grid maximum of each row corrected by the vertex of the local parabola."""
    i = np.argmax(d2, axis=-1)[..., None]
    n = d2.shape[-1]
    f0 = np.take_along_axis(d2, i, -1)[..., 0]
    fm = np.take_along_axis(d2, (i - 1) % n, -1)[..., 0]
    fp = np.take_along_axis(d2, (i + 1) % n, -1)[..., 0]
    curv = 2.0 * f0 - fm - fp
    bump = np.where(curv > 0, (fp - fm) ** 2 / (8.0 * np.where(curv > 0, curv, 1.0)), 0.0)
    return f0 + bump


def _coarse_scan(pairs, p, n_s):
    """Objective on the shift grid using a coarse u-grid, chunked by pairs."""
    s_grid = TWO_PI * np.arange(n_s) / n_s
    n = COARSE_NODES
    rows = max(1, _CHUNK // (n_s * n))
    out = np.empty((len(pairs), n_s))
    for start in range(0, len(pairs), rows):
        idx = np.arange(start, min(start + rows, len(pairs)))
        sub = pairs.take(idx)
        s = np.broadcast_to(s_grid, (len(idx), n_s))
        d2 = sub.dist2(s, n)
        out[idx] = np.sqrt(_parabolic_max(d2)) if math.isinf(p) else _pmean(d2, p)
    return s_grid, out


def _two_minima(values, separation):
    """Global grid minimum plus the best local minimum at least ``separation`` cells away."""
    n = values.shape[-1]
    rows = np.arange(len(values))
    first = np.argmin(values, axis=-1)
    local = (values <= np.roll(values, 1, axis=-1)) & (values <= np.roll(values, -1, axis=-1))
    offset = np.abs(np.arange(n)[None, :] - first[:, None])
    far = np.minimum(offset, n - offset) > separation
    masked = np.where(local & far, values, np.inf)
    second = np.argmin(masked, axis=-1)
    second = np.where(np.isfinite(masked[rows, second]), second, first)
    return first, second


def _bracket_search(pairs, centers, spec, xtol):
    """Golden-section search in ``centers +- BRACKET_CELLS`` grid cells per row.

    Returns the best shift and objective value, and whether the search ended
    at an edge of its bracket (so the minimum may lie outside it).
    """
    p = spec.p
    half = BRACKET_CELLS * TWO_PI / spec.n_s
    if math.isinf(p):
        nodes = spec.n_u
    else:
        # nearly intersecting orbits need more nodes for an accurate objective
        nodes = _doubling(pairs, centers, p, spec.n_u, spec.refine_tol)[2]
    x, f = _golden(pairs, centers - half, centers + half, p, nodes, xtol)
    f_center = _objective(pairs, centers, p, nodes)
    use_center = f_center <= f
    x = np.where(use_center, centers, x)
    f = np.where(use_center, f_center, f)
    at_edge = np.abs(np.abs(x - centers) - half) <= 4.0 * xtol
    return x, f, at_edge


def _rho_batch(pairs, spec):
    p, n_s = spec.p, spec.n_s
    s_grid, coarse = _coarse_scan(pairs, p, n_s)
    i1, i2 = _two_minima(coarse, 2 * BRACKET_CELLS)
    N = len(pairs)
    idx = np.concatenate([np.arange(N), np.arange(N)])
    centers = np.concatenate([s_grid[i1], s_grid[i2]])
    both = pairs.take(idx)
    xtol = np.maximum(spec.refine_tol / (10.0 * both.scale), 1e-15)
    x, f, at_edge = _bracket_search(both, centers, spec, xtol)
    # the coarse grid can misplace a shallow minimum by a few cells; follow
    # the descent by re-centering brackets whose search ended at an edge
    for _ in range(MAX_WALKS):
        rows = np.flatnonzero(at_edge)
        if rows.size == 0:
            break
        xw, fw, edge_w = _bracket_search(both.take(rows), x[rows], spec, xtol[rows])
        better = fw < f[rows]
        x[rows] = np.where(better, xw, x[rows])
        f[rows] = np.where(better, fw, f[rows])
        at_edge[:] = False
        at_edge[rows] = better & edge_w
    pick = f[N:] < f[:N]
    s_best = np.where(pick, x[N:], x[:N])
    value, error = _converged_value(pairs, s_best, spec)
    return value, np.mod(s_best, TWO_PI), error


def _rho_star_batch(pairs, spec):
    return _converged_value(pairs, np.zeros(len(pairs)), spec)


def _as_spec(spec, p):
    if spec is None:
        spec = MetricSpec()
    if p is not None:
        spec = replace(spec, p=p)
    return spec


def rho_star_many(o1s, o2s, spec=None, p=None):
    spec = _as_spec(spec, p)
    _check_pairs(o1s, o2s)
    if not o1s:
        return []
    value, error = _rho_star_batch(_Pairs.from_orbits(o1s, o2s), spec)
    return [DistanceResult(float(v), None, float(e)) for v, e in zip(value, error)]


def rho_many(o1s, o2s, spec=None, p=None):
    spec = _as_spec(spec, p)
    _check_pairs(o1s, o2s)
    if not o1s:
        return []
    value, shift, error = _rho_batch(_Pairs.from_orbits(o1s, o2s), spec)
    return [DistanceResult(float(v), float(s), float(e)) for v, s, e in zip(value, shift, error)]


def rho_star(o1, o2, spec=None, p=None):
    """Distance between orbits with marked pericenters (no phase shift)."""
    return rho_star_many([o1], [o2], spec, p)[0]


def rho(o1, o2, spec=None, p=None):
    """Distance minimized over the phase shift; ``argmin_shift`` is the optimal shift."""
    return rho_many([o1], [o2], spec, p)[0]


def rho2_closed_form(o1, o2):
    """Exact ``p = 2`` shift-minimized distance.

    The mean of ``|Q1(u) - Q2(u + s)|^2`` over ``u`` is
    ``alpha - beta cos s - gamma sin s``; the minimum sits at
    ``s = atan2(gamma, beta)``. The value is then evaluated from vector
    differences at that shift to avoid cancellation for nearby orbits.
    """
    _check_pairs([o1], [o2])
    f1, f2 = ellipse_frame(o1), ellipse_frame(o2)
    beta = float(np.dot(f1.B, f2.B) + np.dot(f1.C, f2.C))
    gamma = float(np.dot(f1.B, f2.C) - np.dot(f1.C, f2.B))
    s = math.atan2(gamma, beta) % TWO_PI
    cs, sn = math.cos(s), math.sin(s)
    dA = f1.A - f2.A
    X = f1.B - (f2.B * cs + f2.C * sn)
    Y = f1.C - (f2.C * cs - f2.B * sn)
    g = float(np.dot(dA, dA) + 0.5 * (np.dot(X, X) + np.dot(Y, Y)))
    value = math.sqrt(max(g, 0.0))
    scale = max(np.linalg.norm(f1.B), np.linalg.norm(f2.B), 1.0)
    return DistanceResult(value, s, 16 * np.finfo(float).eps * float(scale))


def rho2_coefficients(o1, o2):
    """``(alpha, beta, gamma)`` of the p = 2 shift objective."""
    f1, f2 = ellipse_frame(o1), ellipse_frame(o2)
    dA = f1.A - f2.A
    alpha = float(np.dot(dA, dA)) + 0.5 * float(
        np.dot(f1.B, f1.B) + np.dot(f2.B, f2.B) + np.dot(f1.C, f1.C) + np.dot(f2.C, f2.C)
    )
    beta = float(np.dot(f1.B, f2.B) + np.dot(f1.C, f2.C))
    gamma = float(np.dot(f1.B, f2.C) - np.dot(f1.C, f2.B))
    return alpha, beta, gamma


def quotient_equal(o1, o2, tol=1e-9):
    """True when the two orbits coincide as oriented curves (pericenter marks ignored)."""
    return rho2_closed_form(o1, o2).value <= tol


@dataclass(frozen=True)
class MonotonicityReport:
    ps: tuple
    values: tuple
    monotone: bool


def p_monotonicity_check(o1, o2, ps=(1.0, 2.0, math.inf), spec=None, slack=1e-9):
    """Evaluate ``rho_star`` over increasing exponents and check the power-mean chain."""
    spec = _as_spec(spec, None)
    ps = tuple(parse_exponent(p) for p in ps)
    values = tuple(rho_star(o1, o2, spec, p).value for p in ps)
    monotone = all(b >= a - slack for a, b in zip(values, values[1:]))
    return MonotonicityReport(ps, values, monotone)
