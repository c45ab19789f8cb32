"""Integrals of motion, orbit classes and the charts of the orbit manifold."""

import math

import numpy as np

from orbitspace import charts, core

# a circular and a parabolic state with kappa^2 = 1
circ = core.integrals_of_motion(core.StateVector([1, 0, 0], [0, 1, 0]))
para = core.integrals_of_motion(core.StateVector([1, 0, 0], [0, math.sqrt(2), 0]))
print("circular:", circ, core.classify(circ).value)
print("parabolic:", para, core.classify(para).value)
print("residuals of the parabolic point:", core.constraint_residuals(para))

# linear orbits (c = 0) exist for every energy
line = core.OrbitPoint([0, 0, 0], [1, 0, 0], 3.0)
print("linear:", core.classify(line).value, core.constraint_residuals(line))

# rescale c so that the energy relation reads e^2 - h c^2 = 1
npt = charts.normalize(core.OrbitPoint([0, 0, 1], [0.5, 0, 0], -0.375))
print("normalized:", npt, "residuals", npt.residuals())

# the sphere-product chart: (k, p, q) with s = -e^2/c^2
sp = charts.chart_h_forward(npt)
print(f"k = {sp.k:.6f}, log k = {sp.log_k:.6f}, s = {sp.s:.6f}")
print("p =", np.round(sp.p, 6), "q =", np.round(sp.q, 6))
back = charts.chart_h_inverse(sp)
print("inverse recovers c, e, h:", back.c, back.e, back.h)

# linear orbits sit on the s = -inf stratum where p = -q
sp_line = charts.chart_h_forward(charts.normalize(line))
print("linear orbit: s =", sp_line.s, " p.q =", float(np.dot(sp_line.p, sp_line.q)))

# elliptic orbits with a marked pericenter live in a bounded tangent bundle
orb = core.elements_to_orbit(core.KeplerElements(2.0, 0.5, math.radians(30), 0.4, 1.2))
tc = charts.chart_estar(orb)
print("E* chart: base", np.round(tc.base, 6), "|tangent| =", np.linalg.norm(tc.tangent), "radius", tc.radius)
