"""Solving CVP and SVP with nothing but a discrete Gaussian sampler.

CVP: one draw at a sufficiently small width lands on a closest vector
with constant probability.  SVP: sweep the width downward-to-upward and
keep the shortest nonzero sample; the result is within 10*sqrt(n/ln f)
of the true shortest vector.
"""

from fractions import Fraction

import numpy as np

from dgslab import (
    Basis,
    ExactDgsSampler,
    ShiftedLattice,
    cvp_via_dgs,
    cvp_width,
    solve_cvp,
    solve_svp,
    svp_approx_factor,
    svp_via_cdgs,
)

rng = np.random.default_rng(2)

lat = ShiftedLattice(Basis([[Fraction(3), 0], [0, Fraction(1, 2)]]),
                     (Fraction(3, 2), Fraction(1, 4)))
truth = solve_cvp(lat)
print(f"target {lat.shift}, true closest distance^2 = {truth.dist_sq}")
print(f"sampler width used by the reduction: {cvp_width(lat, 3)}")

sampler = ExactDgsSampler()  # reference sampler; any sampler plugs in here
wins = 0
for _ in range(100):
    v, d = cvp_via_dgs(lat, f=3, rng=rng, sampler=sampler.shifted)
    wins += (d == truth.dist_sq)
print(f"single-draw CVP success: {wins}/100 "
      f"(guaranteed at least ~1/18 per draw; use repeats= to boost)")

basis = Basis([[Fraction(2), 1], [Fraction(0), 1]])
svp_truth = solve_svp(basis)
v, d = svp_via_cdgs(basis, f=10, rng=rng, sampler=ExactDgsSampler().centered)
gamma = svp_approx_factor(basis.n, 10)
print(f"\nSVP via centered sampling: found {v} with norm^2 {d}; "
      f"lambda_1^2 = {svp_truth.lambda1_sq}, factor bound {gamma:.2f}")
