"""Distances between elliptic orbits.

rho_star compares orbits point by point in eccentric anomaly, so it sees the
pericenter mark. rho minimizes over a phase shift and only sees the curves.
"""

import math

import numpy as np

from orbitspace import core, metrics, sampling

unit = core.EllipticOrbit([0, 0, 1], 0.0, [1, 0, 0])
flipped = core.EllipticOrbit([0, 0, 1], 0.0, [-1, 0, 0])
bigger = core.EllipticOrbit([0, 0, math.sqrt(2)], 0.0, [1, 0, 0])

for p in (1, 2, math.inf):
    print(f"p={p}: rho*(unit, flipped) = {metrics.rho_star(unit, flipped, p=p).value:.12f}, "
          f"rho(unit, flipped) = {metrics.rho(unit, flipped, p=p).value:.2e}, "
          f"rho(unit, radius 2) = {metrics.rho(unit, bigger, p=p).value:.12f}")

# the marks of circles are invisible to the quotient
print("same curve:", metrics.quotient_equal(unit, flipped))

# p = 2 has an exact minimum over the shift
rng = np.random.default_rng(0)
a, b = sampling.random_elliptic_orbits(rng, 2)
num = metrics.rho(a, b)
exact = metrics.rho2_closed_form(a, b)
print(f"numerical rho_2 {num.value:.15f} at s = {num.argmin_shift:.9f}")
print(f"closed form     {exact.value:.15f} at s = {exact.argmin_shift:.9f}")

# power means grow with p
rep = metrics.p_monotonicity_check(a, b, ps=(1, 1.5, 2, 3, "inf"))
print("rho*_p for p in", rep.ps, "->", np.round(rep.values, 9), "monotone:", rep.monotone)
