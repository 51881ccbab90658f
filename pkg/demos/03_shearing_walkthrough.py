"""
Shearing a Gaussian back into the physical region
=================================================

The Gaussian posterior is unconstrained, but density matrices are not:
every test ket psi imposes <psi|rho|psi> >= 0, a linear inequality on
the coefficients.  Shearing deforms the Gaussian along the worst
offending constraint until the mass on the wrong side drops to a small
threshold, while leaving the constrained mean where it was.  One
constraint, worked by hand.
"""

import numpy as np

from dptomo.gaussian_posterior import GaussianPosterior, moments
from dptomo.state_space_shearing import (
    apply_shear,
    solve_shear_coefficients,
    standardize_constraint,
)

# a deliberately bad belief: mean at -0.4 with the constraint c >= 0,
# so well over half the mass is unphysical
post = GaussianPosterior(A=np.array([[2.0]]), b=np.array([-1.6]))
v, u = np.array([1.0]), 0.0

stats = standardize_constraint(post, v, u)
print(f"boundary in whitened coordinates: x0 = {stats.x0:+.3f}")
print(f"violation probability:            p  = {stats.p:.3f}")

# ask for a tenth of the current violation; the closed form returns the
# axis rescaling a and offset b that do it while pinning the mean of
# the allowed side
a, b = solve_shear_coefficients(stats.x0, stats.p / 10)
print(f"\nshear coefficients: a = {a:+.4f}, b = {b:+.4f}")

sheared = apply_shear(post, v, u, a, b)
after = standardize_constraint(sheared, v, u)
print(f"violation after one shear: {after.p:.4f} (target {stats.p / 10:.4f})")

# the deformation trades mass for width asymmetrically: the mean moves
# toward the allowed side, the variance tightens along v
m0, c0 = moments(post)
m1, c1 = moments(sheared)
print(f"\nmean     {m0[0]:+.4f} -> {m1[0]:+.4f}")
print(f"variance  {c0[0, 0]:.4f} ->  {c1[0, 0]:.4f}")

# shears compose: a second application takes the remaining violation
# down again, and the pipeline loops this over the worst constraint
# until everything sits at the threshold
a2, b2 = solve_shear_coefficients(after.x0, after.p / 10)
twice = apply_shear(sheared, v, u, a2, b2)
print(f"after a second shear: p = {standardize_constraint(twice, v, u).p:.5f}")
