"""Hobby-Rice partitions.

For any n functions on an interval there is a +-1 step function with at
most n + 1 pieces that is orthogonal to all of them.  For {1, t} on [0, 1]
the answer is the partition at 1/4 and 3/4; for 1, cos x, sin x on the
circle it is a split into four quarters.
"""

import numpy as np

from sturmkit.chebyshev import trig_system
from sturmkit.stepspace import canonicalize, solve_hobby_rice

res = solve_hobby_rice([np.ones_like, lambda t: t], length=1.0)
h = canonicalize(res.step, 1e-12)
print("{1, t}:", h)
print("  moments:", res.residual)

V = trig_system(1)
res = solve_hobby_rice(V.basis, length=V.period)
h = canonicalize(res.step, 1e-12)
print("trig_system(1) lengths / (pi/2):", np.round(h.lengths / (np.pi / 2), 9))

# a less symmetric example: three functions with no closed-form partition
basis = [np.exp, lambda t: np.sin(3 * t), lambda t: t ** 3 - t]
res = solve_hobby_rice(basis, length=2.0)
print("exp, sin 3t, t^3 - t on [0, 2]:", canonicalize(res.step, 1e-12))
print("  largest moment:", res.residual)
