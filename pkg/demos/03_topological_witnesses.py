"""Numerical witnesses behind the non-normability of the orbit spaces."""

import math

from orbitspace import witnesses

# degrees of maps of the 2-sphere
for name in ("identity", "antipodal", "constant", "winding2", "winding3"):
    rep = witnesses.sphere_degree(witnesses.NAMED_MAPS[name], depth=4)
    print(f"{name:10s} degree {rep.degree:+d}  raw {rep.raw_sum:+.12f}")

# a sphere of circular orbits cannot be shrunk to a point inside the orbit space
rep = witnesses.orbit_sphere_obstruction(r=5.0, depth=4, tangent_amplitude=0.1)
print("sphere of orbits, projected to c/|c|: degree", rep.degree)

# shrinking circles: Cauchy in rho_p, but the limit has c = 0 and leaves the space
cauchy = witnesses.cauchy_circle_witness(n_max=10, p=math.inf)
print("first row of the distance matrix:", [round(x, 6) for x in cauchy.pairwise[0]])
print("Cauchy modulus:", [round(x, 4) for x in cauchy.cauchy_modulus])
print("limit excluded:", cauchy.limit_candidate_excluded)

# both sides of the compact h = -1 level reach arbitrarily far
unb = witnesses.unbounded_components_witness([10, 100, 1000])
for R, lo, hi in zip(unb.scales, unb.below, unb.above):
    print(f"R={R:6g}: h={lo.h:+.3f} norm {lo.norm:.3f} | h={hi.h:+.3f} norm {hi.norm:.3f}")
print("largest norm on the h = -1 level:", max(o.norm for o in unb.stratum), "bound", unb.stratum_bound)
