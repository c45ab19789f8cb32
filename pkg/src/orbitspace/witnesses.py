"""Numerical witnesses for the topology of orbit spaces.

* Brouwer degree of maps S^2 -> S^2 on an icosahedral triangulation; a
  sphere of circular orbits has degree 1 under the chart projection, so it
  cannot be contracted inside the orbit space.
* Cauchy sequences of shrinking circles whose coordinate limit leaves the
  space (incompleteness).
* Escape points on both sides of the compact ``h = -1`` stratum.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import charts
from .core import DEFAULT_KAPPA2, EllipticOrbit, OrbitPoint, constraint_residuals
from .metrics import MetricSpec, rho_many, rho_star_many

log = logging.getLogger(__name__)

DEGREE_SLACK = 0.01
MAX_IMAGE_EDGE = math.pi / 2


class DegreeError(RuntimeError):
    """The signed area sum is not close to an integer; refine the triangulation."""


@dataclass(frozen=True)
class TriangulatedSphere:
    vertices: np.ndarray
    faces: np.ndarray
    depth: int

    def euler_characteristic(self):
        edges = set()
        for a, b, c in self.faces:
            for x, y in ((a, b), (b, c), (c, a)):
                edges.add((min(x, y), max(x, y)))
        return len(self.vertices) - len(edges) + len(self.faces)


_PHI = (1.0 + math.sqrt(5.0)) / 2.0
_ICO_VERTS = [
    (-1, _PHI, 0), (1, _PHI, 0), (-1, -_PHI, 0), (1, -_PHI, 0),
    (0, -1, _PHI), (0, 1, _PHI), (0, -1, -_PHI), (0, 1, -_PHI),
    (_PHI, 0, -1), (_PHI, 0, 1), (-_PHI, 0, -1), (-_PHI, 0, 1),
]
_ICO_FACES = [
    (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
    (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
    (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
    (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
]


def icosphere(depth):
    """Icosahedron subdivided ``depth`` times, vertices projected to the unit sphere."""
    verts = [np.array(v, dtype=float) / np.linalg.norm(v) for v in _ICO_VERTS]
    faces = list(_ICO_FACES)
    for _ in range(depth):
        cache = {}

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    V = np.array(verts)
    F = np.array(faces, dtype=np.int64)
    # orient every face outward
    triple = np.einsum("ij,ij->i", V[F[:, 0]], np.cross(V[F[:, 1]], V[F[:, 2]]))
    flip = triple < 0
    F[flip] = F[flip][:, [0, 2, 1]]
    return TriangulatedSphere(V, F, depth)


def _vertex_angle(at, b, c):
    tb = b - np.einsum("ij,ij->i", at, b)[:, None] * at
    tc = c - np.einsum("ij,ij->i", at, c)[:, None] * at
    cross = np.linalg.norm(np.cross(tb, tc), axis=1)
    dot = np.einsum("ij,ij->i", tb, tc)
    return np.arctan2(cross, dot), (np.linalg.norm(tb, axis=1) > 0) & (np.linalg.norm(tc, axis=1) > 0)


def signed_areas(a, b, c):
    """Signed spherical excess of geodesic triangles (rows of unit vectors).

    The angle-sum excess gives the area; the sign of ``det[a, b, c]`` gives
    the orientation. Degenerate triangles contribute zero.
    """
    alpha, ok1 = _vertex_angle(a, b, c)
    beta, ok2 = _vertex_angle(b, c, a)
    gamma, ok3 = _vertex_angle(c, a, b)
    excess = np.maximum(alpha + beta + gamma - math.pi, 0.0)
    sign = np.sign(np.einsum("ij,ij->i", a, np.cross(b, c)))
    return np.where(ok1 & ok2 & ok3, sign * excess, 0.0)


@dataclass(frozen=True)
class DegreeReport:
    degree: int
    max_face_distortion: float
    raw_sum: float
    depth: int = 0
    max_renormalization: float = 0.0

    def to_dict(self):
        return asdict(self)


def sphere_degree(fmap, depth=4, sphere=None):
    """Brouwer degree of ``fmap``, a vectorized map from ``(n, 3)`` unit vectors to ``(n, 3)``.

    Images are renormalized onto the sphere; the largest correction is
    reported. ``max_face_distortion`` is the largest ratio of image edge
    length to domain edge length (angular).
    """
    if depth < 3:
        raise ValueError("depth must be at least 3")
    mesh = sphere if sphere is not None else icosphere(depth)
    V, F = mesh.vertices, mesh.faces
    img = np.asarray(fmap(V), dtype=float).reshape(V.shape)
    norms = np.linalg.norm(img, axis=1)
    if np.any(norms == 0) or not np.all(np.isfinite(norms)):
        raise DegreeError("map produced a zero or non-finite vector")
    renorm = float(np.max(np.abs(norms - 1.0)))
    if renorm > 1e-12:
        log.debug("renormalized map images, max deviation %.3g", renorm)
    img = img / norms[:, None]
    a, b, c = img[F[:, 0]], img[F[:, 1]], img[F[:, 2]]
    raw = float(np.sum(signed_areas(a, b, c)) / (4.0 * math.pi))

    def edge_angles(P):
        pa, pb, pc = P[F[:, 0]], P[F[:, 1]], P[F[:, 2]]
        return np.stack([_arc(pa, pb), _arc(pb, pc), _arc(pc, pa)], axis=1)

    image_edges = edge_angles(img)
    distortion = float(np.max(image_edges / edge_angles(V)))
    if np.max(image_edges) >= MAX_IMAGE_EDGE:
        # image triangles must sit in open hemispheres for their areas to be meaningful
        raise DegreeError(
            f"image edge of {np.max(image_edges):.3f} rad at depth {mesh.depth}; the map is under-resolved, raise depth"
        )
    degree = int(round(raw))
    if abs(raw - degree) > DEGREE_SLACK:
        raise DegreeError(f"raw degree sum {raw:.6f} is not within {DEGREE_SLACK} of an integer")
    return DegreeReport(degree, distortion, raw, mesh.depth, renorm)


def _arc(x, y):
    return np.arctan2(np.linalg.norm(np.cross(x, y), axis=1), np.einsum("ij,ij->i", x, y))


# test maps

def identity_map(x):
    return np.array(x, dtype=float)


def antipodal_map(x):
    return -np.asarray(x, dtype=float)


def constant_map(x, target=(0.0, 0.0, 1.0)):
    return np.broadcast_to(np.asarray(target, dtype=float), np.shape(x)).copy()


def winding_map(k):
    """Wrap longitude ``k`` times around the z-axis; degree ``k``."""

    def fmap(x):
        x = np.asarray(x, dtype=float)
        rho = np.hypot(x[:, 0], x[:, 1])
        phi = np.arctan2(x[:, 1], x[:, 0])
        return np.stack([rho * np.cos(k * phi), rho * np.sin(k * phi), x[:, 2]], axis=1)

    return fmap


def compose(f, g):
    return lambda x: f(g(x))


def perturbed(fmap, amplitude=0.05, seed=0):
    """``fmap`` plus a smooth field of pointwise size at most ``amplitude``."""
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(3, 3))
    off = rng.normal(size=3)

    def field(x):
        w = np.sin(x @ M + off)
        return amplitude * w / math.sqrt(3.0)

    return lambda x: fmap(x) + field(np.asarray(x, dtype=float))


NAMED_MAPS = {
    "identity": identity_map,
    "antipodal": antipodal_map,
    "constant": constant_map,
    "winding2": winding_map(2),
    "winding3": winding_map(3),
    "winding-1": winding_map(-1),
}


def orbit_sphere_obstruction(r=1.0, depth=4, b=0.0, tangent_amplitude=0.0, anchor=(0.3, -0.5, 0.8)):
    """Degree of the sphere of orbits ``n -> (c = r n, e)`` under the projection to ``c/|c|``.

    With ``tangent_amplitude > 0`` the Laplace vectors follow the tangent
    field ``amplitude * (w - (w.n) n)`` instead of vanishing. Every member is
    checked against the membership predicate of ``H(b)``.
    """
    if not r > b:
        raise ValueError(f"radius {r} must exceed b = {b}")
    w = np.asarray(anchor, dtype=float)

    def fmap(nrm):
        out = np.empty_like(nrm)
        for i, n in enumerate(nrm):
            c = r * n
            e = tangent_amplitude * (w - np.dot(w, n) * n)
            tc = charts.chart_curvilinear(c, e, b)
            if abs(np.dot(c, e)) > 1e-12 * max(1.0, r):
                raise RuntimeError("family member left the orbit space")
            out[i] = tc.base
        return out

    return sphere_degree(fmap, depth)


@dataclass
class CauchyReport:
    radii: list
    pairwise: list
    cauchy_modulus: list
    limit_candidate_excluded: bool
    metric: str = ""
    expected_max_deviation: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def _tail_modulus(matrix):
    n = len(matrix)
    return [float(np.max(matrix[i:, i:])) for i in range(n)]


def circle_family(radii, kappa2=DEFAULT_KAPPA2, edir=(1.0, 0.0, 0.0)):
    """Coplanar concentric circles in the xy-plane with aligned pericenter marks."""
    return [EllipticOrbit([0.0, 0.0, math.sqrt(kappa2 * r)], 0.0, edir, kappa2) for r in radii]


def in_elliptic_space(c, emag):
    return bool(np.linalg.norm(c) > 0 and 0 <= emag < 1)


def _pairwise(orbits, spec, marked):
    n = len(orbits)
    iu = np.triu_indices(n, 1)
    fn = rho_star_many if marked else rho_many
    res = fn([orbits[i] for i in iu[0]], [orbits[j] for j in iu[1]], spec)
    m = np.zeros((n, n))
    m[iu] = [r.value for r in res]
    return m + m.T


def cauchy_circle_witness(n_max=20, p=2.0, spec=None, kappa2=DEFAULT_KAPPA2):
    """Shrinking circles of radii ``1/n``: Cauchy in ``rho_p`` with a limit outside the space."""
    if n_max < 3:
        raise ValueError("n_max must be at least 3")
    spec = MetricSpec(p) if spec is None else replace(spec, p=p)
    radii = [1.0 / n for n in range(1, n_max + 1)]
    orbits = circle_family(radii, kappa2)
    matrix = _pairwise(orbits, spec, marked=False)
    expected = np.abs(np.subtract.outer(radii, radii))
    deviation = float(np.max(np.abs(matrix - expected)))
    # coordinate limit of the sequence: c -> 0, emag = 0
    limit_c = np.zeros(3)
    return CauchyReport(
        radii=radii,
        pairwise=matrix.tolist(),
        cauchy_modulus=_tail_modulus(matrix),
        limit_candidate_excluded=not in_elliptic_space(limit_c, 0.0),
        metric=f"rho_{spec.p:g}",
        expected_max_deviation=deviation,
    )


def completeness_probe(space, spec=None, b=0.0, n_max=20, kappa2=DEFAULT_KAPPA2):
    """Cauchy sequence converging to the excluded boundary of ``H(b)`` or ``E*``.

    ``space`` is ``"H_b"`` (Euclidean metric of R^6, ``|c_n| = b + 1/n``) or
    ``"Estar"`` (circles of radius ``1/n`` measured with ``rho_star``).
    """
    key = space.lower().replace("(", "_").replace(")", "").replace("*", "star")
    if n_max < 3:
        raise ValueError("n_max must be at least 3")
    if key in ("h_b", "hb", "h"):
        if b < 0:
            raise ValueError("b must be nonnegative")
        mags = [b + 1.0 / n for n in range(1, n_max + 1)]
        points = [np.concatenate([[0.0, 0.0, m], np.zeros(3)]) for m in mags]
        matrix = np.array([[np.linalg.norm(x - y) for y in points] for x in points])
        expected = np.abs(np.subtract.outer(mags, mags))
        limit_c = np.array([0.0, 0.0, b])
        excluded = not np.linalg.norm(limit_c) > b
        return CauchyReport(
            radii=mags,
            pairwise=matrix.tolist(),
            cauchy_modulus=_tail_modulus(matrix),
            limit_candidate_excluded=bool(excluded),
            metric="euclidean_R6",
            expected_max_deviation=float(np.max(np.abs(matrix - expected))),
            extra={"space": f"H({b:g})", "b": b},
        )
    if key in ("estar", "e_star", "e*"):
        spec = spec or MetricSpec()
        radii = [1.0 / n for n in range(1, n_max + 1)]
        orbits = circle_family(radii, kappa2)
        matrix = _pairwise(orbits, spec, marked=True)
        expected = np.abs(np.subtract.outer(radii, radii))
        return CauchyReport(
            radii=radii,
            pairwise=matrix.tolist(),
            cauchy_modulus=_tail_modulus(matrix),
            limit_candidate_excluded=not in_elliptic_space(np.zeros(3), 0.0),
            metric=f"rho_star_{spec.p:g}",
            expected_max_deviation=float(np.max(np.abs(matrix - expected))),
            extra={"space": "E*"},
        )
    raise ValueError(f"unknown space {space!r}; use 'H_b' or 'Estar'")


@dataclass
class UnboundedReport:
    below: list
    above: list
    stratum: list
    stratum_bound: float
    normalized_radii: list
    scales: list

    def to_dict(self):
        def pt(o):
            return {"c": o.c.tolist(), "e": o.e.tolist(), "h": o.h, "norm": o.norm}

        return {
            "scales": self.scales,
            "below": [pt(o) for o in self.below],
            "above": [pt(o) for o in self.above],
            "stratum_samples": len(self.stratum),
            "stratum_max_norm": max(o.norm for o in self.stratum),
            "stratum_bound": self.stratum_bound,
            "normalized_radius_range": [min(self.normalized_radii), max(self.normalized_radii)],
        }


def escape_points(R, kappa2=DEFAULT_KAPPA2):
    """Linear orbits with ``h < -1`` and ``h > -1`` whose R^7 norm exceeds ``R``."""
    if not R > 2:
        raise ValueError("R must exceed 2")
    T = math.sqrt(R * R - 1.0) + 1.0
    e = np.array([1.0, 0.0, 0.0])
    return OrbitPoint(np.zeros(3), e, -T), OrbitPoint(np.zeros(3), e, T)


def unbounded_components_witness(R, kappa2=DEFAULT_KAPPA2, n_samples=1000, seed=42):
    """Escape points on both sides of the compact ``h = -1`` level set.

    ``R`` may be a single scale or a sequence; one point per scale and side is
    returned. The ``h = -1`` stratum is sampled on the normalized sphere
    ``|c'|^2 + |e|^2 = 1`` with ``c' . e = 0`` and mapped back to ``c``.
    """
    scales = [float(R)] if np.ndim(R) == 0 else [float(x) for x in R]
    below, above = [], []
    for scale in scales:
        lo, hi = escape_points(scale, kappa2)
        below.append(lo)
        above.append(hi)
    rng = np.random.default_rng(seed)
    stratum, radii = [], []
    for _ in range(n_samples):
        cn = rng.normal(size=3)
        cn /= np.linalg.norm(cn)
        t = rng.normal(size=3)
        t -= np.dot(t, cn) * cn
        t /= np.linalg.norm(t)
        theta = rng.uniform(0.0, math.pi / 2)
        npt = charts.NormalizedOrbitPoint(math.cos(theta) * cn, math.sin(theta) * t, -1.0)
        radii.append(float(np.linalg.norm(np.concatenate([npt.c, npt.e]))))
        stratum.append(charts.denormalize(npt, kappa2))
    # |c|^2 + |e|^2 <= max(1, kappa2^2 / 2) on the stratum, plus h^2 = 1
    bound = math.sqrt(max(1.0, kappa2**2 / 2.0) + 1.0)
    return UnboundedReport(below, above, stratum, bound, radii, scales)


def max_residual(points, kappa2=DEFAULT_KAPPA2):
    return max(max(abs(r) for r in constraint_residuals(o, kappa2)) for o in points)
