"""Seeded random samples of states, manifold points and elliptic orbits."""

import math

import numpy as np
from scipy.spatial.transform import Rotation

from .charts import NormalizedOrbitPoint
from .core import EllipticOrbit, KeplerElements, StateVector, elements_to_orbit


def _unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def _orthonormal_pair(rng):
    a = _unit(rng)
    b = rng.normal(size=3)
    b -= np.dot(a, b) * a
    return a, b / np.linalg.norm(b)


def random_rotation(rng):
    return Rotation.random(random_state=rng).as_matrix()


def random_state_vectors(rng, n):
    """States of every orbit class: |r| log-uniform in [0.1, 10], kappa2 in [0.1, 10]."""
    out = []
    for _ in range(n):
        kappa2 = 10.0 ** rng.uniform(-1, 1)
        rmag = 10.0 ** rng.uniform(-1, 1)
        # speeds up to ~2x escape speed
        vesc = math.sqrt(2.0 * kappa2 / rmag)
        v = _unit(rng) * vesc * rng.uniform(0.0, 2.0)
        out.append(StateVector(_unit(rng) * rmag, v, kappa2))
    return out


def random_normalized_points(rng, n, strata=True):
    """Points of ``e^2 - h c^2 = 1, c.e = 0``.

    With ``strata`` about a tenth of the samples are linear (c = 0) and a
    tenth circular (e = 0).
    """
    out = []
    for i in range(n):
        kind = i % 10 if strata else 9
        a, b = _orthonormal_pair(rng)
        if kind == 0:
            out.append(NormalizedOrbitPoint(np.zeros(3), a, rng.uniform(-5, 5)))
            continue
        cmag = 10.0 ** rng.uniform(-1, 1)
        emag = 0.0 if kind == 1 else 10.0 ** rng.uniform(-2, 0.5)
        h = (emag**2 - 1.0) / cmag**2
        out.append(NormalizedOrbitPoint(cmag * a, emag * b, h))
    return out


def random_elements(rng, a_range=(0.5, 2.0), emax=0.9):
    return KeplerElements(
        rng.uniform(*a_range),
        rng.uniform(0.0, emax),
        math.acos(rng.uniform(-1.0, 1.0)),
        rng.uniform(0.0, 2 * math.pi),
        rng.uniform(0.0, 2 * math.pi),
    )


def random_elliptic_orbits(rng, n, a_range=(0.5, 2.0), emax=0.9, kappa2=1.0):
    return [elements_to_orbit(random_elements(rng, a_range, emax), kappa2) for _ in range(n)]


def rotate_orbit(orb, R):
    return EllipticOrbit(R @ orb.c, orb.emag, R @ orb.edir, orb.kappa2)


def remark_pericenter(orb, angle):
    """Copy of a circular orbit with its pericenter mark turned in-plane by ``angle``."""
    if orb.emag != 0.0:
        raise ValueError("only circular orbits can be re-marked without changing the curve")
    pole = orb.c / np.linalg.norm(orb.c)
    d = orb.edir
    q = np.cross(pole, d)
    return EllipticOrbit(orb.c, 0.0, math.cos(angle) * d + math.sin(angle) * q, orb.kappa2)
