"""Explicit homeomorphisms between orbit spaces and sphere products.

Three charts are provided:

* curvilinear orbits with ``|c| > b``  <->  ``TS^2 x (b, inf)``
* all orbits (normalized)              <->  ``(0, inf) x S^2 x S^2``
* elliptic orbits, marked pericenter   <->  ``BT(S^2) x (0, inf)``

Tangent vectors are stored extrinsically, as 3-vectors orthogonal to the
base point, which works globally on the sphere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    CONSTRAINT_TOL,
    DEFAULT_KAPPA2,
    EllipticOrbit,
    OrbitError,
    OrbitPoint,
    _vec3,
    constraint_residuals,
    default_pericenter,
    residual_scale,
)

CHART_TOL = 1e-12
NORMALIZED_TOL = 1e-10


class ChartError(OrbitError):
    pass


@dataclass(frozen=True)
class TangentChartPoint:
    base: np.ndarray
    tangent: np.ndarray
    radius: float

    def __post_init__(self):
        base = _vec3(self.base, "base")
        tangent = _vec3(self.tangent, "tangent")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "tangent", tangent)
        object.__setattr__(self, "radius", float(self.radius))
        if abs(np.linalg.norm(base) - 1.0) > CHART_TOL:
            raise ChartError("base point must lie on the unit sphere")
        if abs(np.dot(base, tangent)) > CHART_TOL * max(1.0, np.linalg.norm(tangent)):
            raise ChartError("tangent vector must be orthogonal to the base point")


@dataclass(frozen=True)
class SphereProductPoint:
    """Point ``(k, p, q)`` with the auxiliary coordinate ``s``.

    ``s`` is an extended real in ``[-inf, 0]``; it equals ``-inf`` exactly for
    linear orbits, where ``p = -q``. When ``log_k`` is given it is the
    authoritative coordinate and ``k`` is derived from it, so points whose
    ``k`` under- or overflows a double (``|h|`` beyond ~700) still round-trip.
    """

    k: float
    p: np.ndarray
    q: np.ndarray
    s: float
    log_k: float = None

    def __post_init__(self):
        object.__setattr__(self, "p", _vec3(self.p, "p"))
        object.__setattr__(self, "q", _vec3(self.q, "q"))
        object.__setattr__(self, "s", float(self.s))
        if self.log_k is None:
            k = float(self.k)
            if not (k > 0 and math.isfinite(k)):
                raise ChartError(f"k must be positive and finite, got {k}")
            object.__setattr__(self, "k", k)
            object.__setattr__(self, "log_k", math.log(k))
        else:
            log_k = float(self.log_k)
            if not math.isfinite(log_k):
                raise ChartError(f"log k must be finite, got {log_k}")
            object.__setattr__(self, "log_k", log_k)
            object.__setattr__(self, "k", math.exp(log_k) if log_k < 709.0 else math.inf)
        for name in ("p", "q"):
            if abs(np.linalg.norm(getattr(self, name)) - 1.0) > CHART_TOL:
                raise ChartError(f"{name} must lie on the unit sphere")
        if self.s > 0 or math.isnan(self.s):
            raise ChartError(f"s must lie in [-inf, 0], got {self.s}")

    @classmethod
    def from_log(cls, log_k, p, q, s):
        """Build from the real-line coordinate of ``H = R x S^2 x S^2``."""
        return cls(None, p, q, s, log_k)


@dataclass(frozen=True)
class NormalizedOrbitPoint:
    """``(c, e, h)`` after rescaling ``c`` so that ``e^2 - h c^2 = 1``."""

    c: np.ndarray
    e: np.ndarray
    h: float

    def __post_init__(self):
        object.__setattr__(self, "c", _vec3(self.c, "c"))
        object.__setattr__(self, "e", _vec3(self.e, "e"))
        object.__setattr__(self, "h", float(self.h))

    def residuals(self):
        c2 = float(np.dot(self.c, self.c))
        e2 = float(np.dot(self.e, self.e))
        return float(np.dot(self.c, self.e)), e2 - self.h * c2 - 1.0

    def on_manifold(self, tol=NORMALIZED_TOL):
        r4, r5 = self.residuals()
        scale = max(1.0, abs(self.h) * float(np.dot(self.c, self.c)))
        return abs(r4) <= tol * scale and abs(r5) <= tol * scale


def normalize(pt, kappa2=DEFAULT_KAPPA2, tol=CONSTRAINT_TOL):
    """Rescale ``c`` by ``sqrt(2)/kappa2``; the energy relation becomes ``e^2 - h c^2 = 1``."""
    r4, r5 = constraint_residuals(pt, kappa2)
    scale = residual_scale(pt, kappa2)
    if abs(r4) > tol * scale or abs(r5) > tol * scale:
        raise ChartError(f"point is off the orbit manifold (residuals {r4:.3g}, {r5:.3g})")
    return NormalizedOrbitPoint(math.sqrt(2.0) / kappa2 * pt.c, pt.e, pt.h)


def denormalize(npt, kappa2=DEFAULT_KAPPA2):
    return OrbitPoint(kappa2 / math.sqrt(2.0) * npt.c, npt.e, npt.h)


def chart_curvilinear(c, e, b=0.0, tol=CONSTRAINT_TOL):
    c = np.asarray(c, dtype=float)
    e = np.asarray(e, dtype=float)
    radius = float(np.linalg.norm(c))
    if not radius > b:
        raise ChartError(f"|c| = {radius} must exceed b = {b}")
    if abs(np.dot(c, e)) > tol * max(1.0, radius * np.linalg.norm(e)):
        raise ChartError("c and e must be orthogonal")
    base = c / radius
    # remove the rounding-level normal component so the tangent is exact
    tangent = e - np.dot(base, e) * base
    return TangentChartPoint(base, tangent, radius)


def chart_curvilinear_inv(tc, b=0.0):
    if not tc.radius > b:
        raise ChartError(f"radius {tc.radius} must exceed b = {b}")
    return tc.radius * tc.base, np.array(tc.tangent)


def chart_h_forward(npt, tol=NORMALIZED_TOL):
    """Map a normalized orbit point to ``(k, p, q)`` with ``u = c + e``, ``v = c - e``."""
    if not npt.on_manifold(tol):
        raise ChartError("point is off the normalized manifold e^2 - h c^2 = 1")
    c, e, h = npt.c, npt.e, npt.h
    u = c + e
    v = c - e
    un, vn = np.linalg.norm(u), np.linalg.norm(v)
    if un == 0.0 or vn == 0.0:
        raise ChartError("c + e and c - e must be nonzero")
    c2 = float(np.dot(c, c))
    e2 = float(np.dot(e, e))
    if c2 == 0.0:
        s = -math.inf
        log_k = -h
    else:
        s = -e2 / c2
        # exp(-h) - exp(s) = exp(-h) * (1 - exp(-(e^2 - h c^2)/c^2)); 1/c^2 on the manifold
        log_k = -h + math.log(-math.expm1(-(e2 - h * c2) / c2))
    return SphereProductPoint.from_log(log_k, u / un, v / vn, s)


def chart_h_inverse(sp):
    p, q = sp.p, sp.q
    # a = 1 - p.q and b = 1 + p.q without cancellation
    a = 0.5 * float(np.dot(p - q, p - q))
    b = 0.5 * float(np.dot(p + q, p + q))
    s = -math.inf if b == 0.0 else -a / b
    h = -float(np.logaddexp(sp.log_k, s))
    denom = a - b * h
    if not denom > 0:
        raise ChartError("point is outside the image of the forward chart")
    r = math.sqrt(2.0 / denom)
    return NormalizedOrbitPoint(0.5 * r * (p + q), 0.5 * r * (p - q), h)


def chart_estar(orb):
    radius = orb.cnorm
    base = orb.c / radius
    tangent = orb.emag * (orb.edir - np.dot(base, orb.edir) * base)
    return TangentChartPoint(base, tangent, radius)


def chart_estar_inv(tc, kappa2=DEFAULT_KAPPA2, edir=None):
    """Inverse of :func:`chart_estar`.

    A zero tangent vector (circular orbit) carries no pericenter mark; ``edir``
    supplies it, defaulting to the ascending-node direction.
    """
    if not tc.radius > 0:
        raise ChartError("radius must be positive")
    emag = float(np.linalg.norm(tc.tangent))
    if not emag < 1:
        raise ChartError(f"tangent length {emag} must be below 1")
    c = tc.radius * tc.base
    if emag > 0:
        direction = tc.tangent / emag
    elif edir is not None:
        direction = np.asarray(edir, dtype=float)
    else:
        direction = default_pericenter(c)
    return EllipticOrbit(c, emag, direction, kappa2)
