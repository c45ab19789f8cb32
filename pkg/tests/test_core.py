import math

import numpy as np
import pytest

from orbitspace import core, sampling
from orbitspace.core import (
    CollisionError,
    EllipticOrbit,
    KeplerElements,
    OrbitClass,
    OrbitError,
    OrbitPoint,
    StateVector,
)


def test_integrals_circular():
    pt = core.integrals_of_motion(StateVector([1, 0, 0], [0, 1, 0], 1.0))
    assert pt.h == pytest.approx(-0.5, abs=1e-15)
    assert np.allclose(pt.c, [0, 0, 1], atol=1e-15)
    assert np.allclose(pt.e, 0, atol=1e-15)


def test_integrals_parabolic():
    pt = core.integrals_of_motion(StateVector([1, 0, 0], [0, math.sqrt(2), 0], 1.0))
    assert abs(pt.h) < 1e-15
    assert np.allclose(pt.c, [0, 0, math.sqrt(2)], atol=1e-15)
    assert np.allclose(pt.e, [1, 0, 0], atol=1e-15)
    assert core.classify(pt) is OrbitClass.PARABOLIC


def test_state_vector_rejects_origin():
    with pytest.raises(OrbitError):
        StateVector([0, 0, 0], [0, 1, 0], 1.0)
    with pytest.raises(OrbitError):
        StateVector([1, 0, 0], [0, 1, 0], 0.0)


def test_integrals_residuals_scaled():
    rng = np.random.default_rng(1)
    for s in sampling.random_state_vectors(rng, 2000):
        pt = core.integrals_of_motion(s)
        r4, r5 = core.constraint_residuals(pt, s.kappa2)
        scale = core.residual_scale(pt, s.kappa2)
        assert abs(r4) <= 1e-12 * scale
        assert abs(r5) <= 1e-12 * scale


@pytest.mark.parametrize(
    "c,e,h,expected",
    [
        ([0, 0, 0], [1, 0, 0], 5.0, (0.0, 0.0)),
        ([0, 0, 1], [0, 0, 0], -0.5, (0.0, 0.0)),
        ([0, 0, 1], [0.5, 0, 0], 0.0, (0.0, 0.75)),
    ],
)
def test_constraint_residuals(c, e, h, expected):
    assert core.constraint_residuals(OrbitPoint(c, e, h), 1.0) == pytest.approx(expected, abs=1e-15)


def test_classify_examples():
    assert core.classify(OrbitPoint([0, 0, 1], [0, 0, 0], -0.5)) is OrbitClass.CIRCULAR
    assert core.classify(OrbitPoint([0, 0, 0], [1, 0, 0], 3.0)) is OrbitClass.LINEAR
    assert core.classify(OrbitPoint([0, 0, math.sqrt(2)], [1, 0, 0], 0.0)) is OrbitClass.PARABOLIC
    # e = 0.5 with h from the energy relation
    assert core.classify(OrbitPoint([0, 0, 1], [0.5, 0, 0], -0.375)) is OrbitClass.ELLIPTIC
    assert core.classify(OrbitPoint([0, 0, 1], [2, 0, 0], 1.5)) is OrbitClass.HYPERBOLIC


def test_classify_rejects_off_manifold():
    with pytest.raises(OrbitError):
        core.classify(OrbitPoint([0, 0, 1], [0.5, 0, 0], 0.0))


def test_classify_rotation_invariant():
    rng = np.random.default_rng(3)
    for s in sampling.random_state_vectors(rng, 300):
        pt = core.integrals_of_motion(s)
        R = sampling.random_rotation(rng)
        rotated = OrbitPoint(R @ pt.c, R @ pt.e, pt.h)
        assert core.classify(rotated, kappa2=s.kappa2) is core.classify(pt, kappa2=s.kappa2)


def test_elements_to_orbit_examples():
    o = core.elements_to_orbit(KeplerElements(1, 0, 0, 0, 0))
    assert np.allclose(o.c, [0, 0, 1]) and o.emag == 0 and np.allclose(o.edir, [1, 0, 0])
    o = core.elements_to_orbit(KeplerElements(2, 0.5, 0, 0, 0))
    assert np.allclose(o.c, [0, 0, math.sqrt(1.5)], atol=1e-15)
    assert o.emag == 0.5 and np.allclose(o.edir, [1, 0, 0])
    # golden value of the node convention: inc = pi/2 with raan = 0 tilts the pole to -y
    o = core.elements_to_orbit(KeplerElements(1, 0, math.pi / 2, 0, 0))
    assert np.allclose(o.c, [0, -1, 0], atol=1e-15)


def test_elements_validation():
    with pytest.raises(OrbitError):
        KeplerElements(1, 1.0, 0)
    with pytest.raises(OrbitError):
        KeplerElements(0, 0.1, 0)
    with pytest.raises(OrbitError):
        KeplerElements(1, 0.1, 4.0)


def test_orbit_to_elements_examples():
    el = core.orbit_to_elements(EllipticOrbit([0, 0, 1], 0, [1, 0, 0]))
    assert (el.a, el.ecc, el.inc) == pytest.approx((1, 0, 0))
    el = core.orbit_to_elements(EllipticOrbit([0, 0, math.sqrt(1.5)], 0.5, [1, 0, 0]))
    assert el.a == pytest.approx(2.0, rel=1e-15)


def _angle_diff(a, b):
    return abs((a - b + math.pi) % (2 * math.pi) - math.pi)


def test_elements_round_trip():
    rng = np.random.default_rng(5)
    for _ in range(2000):
        el = sampling.random_elements(rng, emax=0.99)
        back = core.orbit_to_elements(core.elements_to_orbit(el))
        assert back.a == pytest.approx(el.a, rel=1e-10)
        assert back.ecc == pytest.approx(el.ecc, abs=1e-10)
        for name in ("inc", "raan", "argp"):
            assert _angle_diff(getattr(back, name), getattr(el, name)) <= 1e-10


@pytest.mark.parametrize("inc", [0.0, math.pi])
def test_degenerate_inclination_round_trip(inc):
    el = KeplerElements(1.3, 0.2, inc, 0.7, 1.1)
    orb = core.elements_to_orbit(el)
    back = core.orbit_to_elements(orb)
    canon = core.canonical_elements(el)
    assert back.raan == 0.0
    assert _angle_diff(back.argp, canon.argp) <= 1e-12
    again = core.elements_to_orbit(back)
    assert np.allclose(again.c, orb.c, atol=1e-14) and np.allclose(again.edir, orb.edir, atol=1e-14)


def test_orbit_round_trip_reverse():
    rng = np.random.default_rng(6)
    for orb in sampling.random_elliptic_orbits(rng, 1000):
        back = core.elements_to_orbit(core.orbit_to_elements(orb))
        assert np.allclose(back.c, orb.c, atol=1e-10)
        assert np.allclose(back.e, orb.e, atol=1e-10)


def test_elliptic_orbit_energy_relation():
    orb = EllipticOrbit([0.3, -0.2, 1.1], 0.4, core.default_pericenter([0.3, -0.2, 1.1]), 2.0)
    r4, r5 = core.constraint_residuals(orb.to_point(), 2.0)
    assert abs(r4) < 1e-15 and abs(r5) < 1e-14


def test_elliptic_orbit_validation():
    with pytest.raises(OrbitError):
        EllipticOrbit([0, 0, 0], 0.1, [1, 0, 0])
    with pytest.raises(OrbitError):
        EllipticOrbit([0, 0, 1], 1.0, [1, 0, 0])
    with pytest.raises(OrbitError):
        EllipticOrbit([0, 0, 1], 0.1, [0, 0, 1])


def test_propagate_circular_period():
    start = StateVector([1, 0, 0], [0, 1, 0], 1.0)
    end = core.propagate(start, 2 * math.pi / 62832, 62832)
    assert np.allclose(end.r, start.r, atol=1e-6)
    assert np.allclose(end.v, start.v, atol=1e-6)


def test_propagate_zero_steps_identity():
    start = StateVector([1, 0.2, 0], [0, 1, 0.1], 1.0)
    end = core.propagate(start, 1e-3, 0)
    assert np.array_equal(end.r, start.r) and np.array_equal(end.v, start.v)


def test_propagate_collision_guard():
    # radial fall towards the centre
    with pytest.raises(CollisionError):
        core.propagate(StateVector([1, 0, 0], [0, 0, 0], 1.0), 1e-3, 5000, min_radius=1e-2)


def test_state_from_elements_matches_orbit():
    rng = np.random.default_rng(8)
    for _ in range(200):
        el = sampling.random_elements(rng)
        pt = core.integrals_of_motion(core.state_from_elements(el, 1.0, rng.uniform(0, 6)))
        orb = core.elements_to_orbit(el)
        assert np.allclose(pt.c, orb.c, atol=1e-12)
        assert np.allclose(pt.e, orb.e, atol=1e-12)
