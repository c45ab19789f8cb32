"""Orbit representations, integrals of motion and element conversions.

All vectors are plain ``numpy`` arrays of shape ``(3,)``. The gravitational
parameter ``kappa2`` (GM) is passed explicitly everywhere; ``1.0`` gives
normalized units.

The energy is the standard vis-viva value ``|v|^2/2 - kappa2/|r|``; with it
the two constraint relations

    c . e = 0
    2 h c^2 - kappa2^2 (e^2 - 1) = 0

hold identically for every state vector.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_KAPPA2 = 1.0
CONSTRAINT_TOL = 1e-9
# sin(inc) at or below this counts as an equatorial plane (sin(pi) is ~1.2e-16)
DEGENERATE_SIN = 4 * np.finfo(float).eps


class OrbitError(ValueError):
    """Raised for inputs that do not describe a valid orbit."""


class CollisionError(RuntimeError):
    """Raised by :func:`propagate` when the trajectory gets too close to the centre."""


def _vec3(x, name):
    arr = np.array(x, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise OrbitError(f"{name} must be a 3-vector, got shape {np.shape(x)}")
    if not np.all(np.isfinite(arr)):
        raise OrbitError(f"{name} has non-finite entries")
    arr.flags.writeable = False
    return arr


def _check_kappa2(kappa2):
    kappa2 = float(kappa2)
    if not (kappa2 > 0 and math.isfinite(kappa2)):
        raise OrbitError(f"kappa2 must be positive and finite, got {kappa2}")
    return kappa2


@dataclass(frozen=True)
class StateVector:
    r: np.ndarray
    v: np.ndarray
    kappa2: float = DEFAULT_KAPPA2

    def __post_init__(self):
        object.__setattr__(self, "r", _vec3(self.r, "r"))
        object.__setattr__(self, "v", _vec3(self.v, "v"))
        object.__setattr__(self, "kappa2", _check_kappa2(self.kappa2))
        if not np.linalg.norm(self.r) > 0:
            raise OrbitError("position must be nonzero")


@dataclass(frozen=True)
class OrbitPoint:
    """Point ``(c, e, h)`` of R^7.

    Construction does not enforce the constraint relations; use
    :func:`constraint_residuals` or :func:`on_manifold` for that.
    """

    c: np.ndarray
    e: np.ndarray
    h: float

    def __post_init__(self):
        object.__setattr__(self, "c", _vec3(self.c, "c"))
        object.__setattr__(self, "e", _vec3(self.e, "e"))
        object.__setattr__(self, "h", float(self.h))

    def as_array(self):
        return np.concatenate([self.c, self.e, [self.h]])

    @property
    def norm(self):
        """Euclidean norm in R^7."""
        return float(np.linalg.norm(self.as_array()))


class OrbitClass(enum.Enum):
    CIRCULAR = "circular"
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    HYPERBOLIC = "hyperbolic"
    LINEAR = "linear"


@dataclass(frozen=True)
class KeplerElements:
    """Elliptic Keplerian elements; angles in radians."""

    a: float
    ecc: float
    inc: float
    raan: float = 0.0
    argp: float = 0.0

    def __post_init__(self):
        for name in ("a", "ecc", "inc", "raan", "argp"):
            val = float(getattr(self, name))
            if not math.isfinite(val):
                raise OrbitError(f"{name} must be finite")
            object.__setattr__(self, name, val)
        if not self.a > 0:
            raise OrbitError(f"semi-major axis must be positive, got {self.a}")
        if not 0 <= self.ecc < 1:
            raise OrbitError(f"eccentricity must lie in [0, 1), got {self.ecc}")
        if not 0 <= self.inc <= math.pi:
            raise OrbitError(f"inclination must lie in [0, pi], got {self.inc}")


@dataclass(frozen=True)
class EllipticOrbit:
    """Elliptic orbit with a marked pericenter.

    ``edir`` is kept even when ``emag == 0`` so that circular orbits remember
    which point counts as the pericenter.
    """

    c: np.ndarray
    emag: float
    edir: np.ndarray
    kappa2: float = DEFAULT_KAPPA2
    tol: float = field(default=CONSTRAINT_TOL, repr=False, compare=False)

    def __post_init__(self):
        c = _vec3(self.c, "c")
        edir = _vec3(self.edir, "edir")
        emag = float(self.emag)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "edir", edir)
        object.__setattr__(self, "emag", emag)
        object.__setattr__(self, "kappa2", _check_kappa2(self.kappa2))
        cnorm = np.linalg.norm(c)
        if not cnorm > 0:
            raise OrbitError("elliptic orbit needs nonzero angular momentum")
        if not 0 <= emag < 1:
            raise OrbitError(f"eccentricity must lie in [0, 1), got {emag}")
        if abs(np.linalg.norm(edir) - 1.0) > self.tol:
            raise OrbitError("pericenter direction must be a unit vector")
        if abs(np.dot(c, edir)) > self.tol * max(1.0, cnorm):
            raise OrbitError("pericenter direction must be orthogonal to c")

    @property
    def e(self):
        return self.emag * self.edir

    @property
    def cnorm(self):
        return float(np.linalg.norm(self.c))

    @property
    def h(self):
        return self.kappa2**2 * (self.emag**2 - 1.0) / (2.0 * self.cnorm**2)

    @property
    def semi_major_axis(self):
        return self.cnorm**2 / (self.kappa2 * (1.0 - self.emag**2))

    def to_point(self):
        return OrbitPoint(self.c, self.e, self.h)


def integrals_of_motion(state):
    """Energy, angular momentum and Laplace vector of a state."""
    r, v, k2 = state.r, state.v, state.kappa2
    rnorm = np.linalg.norm(r)
    if not rnorm > 0:
        raise OrbitError("position must be nonzero")
    c = np.cross(r, v)
    e = np.cross(v, c) / k2 - r / rnorm
    h = 0.5 * np.dot(v, v) - k2 / rnorm
    return OrbitPoint(c, e, h)


def constraint_residuals(pt, kappa2=DEFAULT_KAPPA2):
    """Return ``(c.e, 2hc^2 - kappa2^2 (e^2 - 1))`` without any scaling."""
    c, e, h = pt.c, pt.e, pt.h
    r4 = float(np.dot(c, e))
    r5 = float(2.0 * h * np.dot(c, c) - kappa2**2 * (np.dot(e, e) - 1.0))
    return r4, r5


def residual_scale(pt, kappa2=DEFAULT_KAPPA2):
    return max(1.0, kappa2**2, abs(pt.h) * float(np.dot(pt.c, pt.c)))


def on_manifold(pt, kappa2=DEFAULT_KAPPA2, tol=CONSTRAINT_TOL):
    r4, r5 = constraint_residuals(pt, kappa2)
    scale = residual_scale(pt, kappa2)
    return abs(r4) <= tol * scale and abs(r5) <= tol * scale


def classify(pt, tol=CONSTRAINT_TOL, kappa2=DEFAULT_KAPPA2):
    if not on_manifold(pt, kappa2, tol):
        raise OrbitError("point violates the orbit constraints")
    if np.linalg.norm(pt.c) <= tol:
        return OrbitClass.LINEAR
    if np.linalg.norm(pt.e) <= tol:
        return OrbitClass.CIRCULAR
    if pt.h < -tol:
        return OrbitClass.ELLIPTIC
    if pt.h > tol:
        return OrbitClass.HYPERBOLIC
    return OrbitClass.PARABOLIC


def _rotation(inc, raan, argp):
    # R = Rz(raan) Rx(inc) Rz(argp); columns are pericenter, in-plane normal, pole.
    cO, sO = math.cos(raan), math.sin(raan)
    ci, si = math.cos(inc), math.sin(inc)
    cw, sw = math.cos(argp), math.sin(argp)
    return np.array(
        [
            [cO * cw - sO * ci * sw, -cO * sw - sO * ci * cw, sO * si],
            [sO * cw + cO * ci * sw, -sO * sw + cO * ci * cw, -cO * si],
            [si * sw, si * cw, ci],
        ]
    )


def elements_to_orbit(el, kappa2=DEFAULT_KAPPA2):
    kappa2 = _check_kappa2(kappa2)
    rot = _rotation(el.inc, el.raan, el.argp)
    cmag = math.sqrt(kappa2 * el.a * (1.0 - el.ecc**2))
    return EllipticOrbit(cmag * rot[:, 2], el.ecc, rot[:, 0], kappa2)


def orbit_to_elements(orb):
    """Inverse of :func:`elements_to_orbit`.

    For ``inc`` 0 or pi (up to rounding) the node line is undefined; ``raan``
    is then reported as 0 and ``argp`` is measured from the +x axis.
    """
    cnorm = orb.cnorm
    pole = orb.c / cnorm
    a = cnorm**2 / (orb.kappa2 * (1.0 - orb.emag**2))
    sin_i = math.hypot(pole[0], pole[1])
    inc = math.atan2(sin_i, pole[2])
    p = orb.edir
    if sin_i <= DEGENERATE_SIN:
        raan = 0.0
        argp = math.atan2(p[1], p[0]) if pole[2] > 0 else math.atan2(-p[1], p[0])
    else:
        raan = math.atan2(pole[0], -pole[1])
        node = np.array([math.cos(raan), math.sin(raan), 0.0])
        argp = math.atan2(np.dot(p, np.cross(pole, node)), np.dot(p, node))
    return KeplerElements(a, orb.emag, inc, raan % (2 * math.pi), argp % (2 * math.pi))


def canonical_elements(el):
    """Elements with the degenerate-node convention applied and angles in [0, 2pi)."""
    two_pi = 2 * math.pi
    if abs(math.sin(el.inc)) <= DEGENERATE_SIN:
        # retrograde planes turn the node rotation around
        argp = el.raan + el.argp if math.cos(el.inc) > 0 else el.argp - el.raan
        return KeplerElements(el.a, el.ecc, el.inc, 0.0, argp % two_pi)
    return KeplerElements(el.a, el.ecc, el.inc, el.raan % two_pi, el.argp % two_pi)


def default_pericenter(c):
    """Pericenter mark used when none is available: the ascending node (argp = 0)."""
    pole = np.asarray(c, dtype=float) / np.linalg.norm(c)
    node = np.cross([0.0, 0.0, 1.0], pole)
    nn = np.linalg.norm(node)
    if nn == 0.0:
        return np.array([1.0, 0.0, 0.0])
    return node / nn


def _accel(r, kappa2):
    rn = math.sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2])
    return -kappa2 * r / rn**3, rn


def propagate(state, dt, steps, min_radius=1e-6):
    """Fixed-step RK4 integration of the two-body equation.

    Meant for checking conservation of the integrals of motion, not for
    accurate long-term propagation. Raises :class:`CollisionError` when
    ``|r|`` falls below ``min_radius`` at any stage evaluation.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    steps = int(steps)
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    k2 = state.kappa2
    r = np.array(state.r)
    v = np.array(state.v)

    def acc(x):
        a, rn = _accel(x, k2)
        if rn < min_radius:
            raise CollisionError(f"|r| = {rn:.3g} fell below {min_radius:g}")
        return a

    half = 0.5 * dt
    for _ in range(steps):
        a1 = acc(r)
        r2 = r + half * v
        v2 = v + half * a1
        a2 = acc(r2)
        r3 = r + half * v2
        v3 = v + half * a2
        a3 = acc(r3)
        r4 = r + dt * v3
        v4 = v + dt * a3
        a4 = acc(r4)
        r = r + dt / 6.0 * (v + 2.0 * v2 + 2.0 * v3 + v4)
        v = v + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
    return StateVector(r, v, k2)


def state_from_elements(el, kappa2=DEFAULT_KAPPA2, ecc_anomaly=0.0):
    """Position and velocity on an elliptic orbit at a given eccentric anomaly."""
    rot = _rotation(el.inc, el.raan, el.argp)
    a, ecc = el.a, el.ecc
    b = a * math.sqrt(1.0 - ecc**2)
    cu, su = math.cos(ecc_anomaly), math.sin(ecc_anomaly)
    rdist = a * (1.0 - ecc * cu)
    n = math.sqrt(kappa2 / a**3)
    x, y = a * (cu - ecc), b * su
    vx, vy = -a * n * su * a / rdist, b * n * cu * a / rdist
    return StateVector(rot[:, 0] * x + rot[:, 1] * y, rot[:, 0] * vx + rot[:, 1] * vy, kappa2)
