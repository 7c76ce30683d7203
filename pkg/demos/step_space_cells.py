"""The sphere of signed partitions.

A unit vector x in R^{n+1} encodes the step function whose i-th interval
has length x_i^2 and sign sign(x_i).  Zero coordinates collapse intervals,
which is how the cells of the sphere glue together.
"""

import numpy as np

from sturmkit.stepspace import (
    SignedPartition,
    canonicalize,
    cell_of,
    cell_step,
    step_from_sphere,
)

for coords in ([1, -1, 1, -1], [1, -1, 0, 1], [2, 1, -1, 0]):
    p = SignedPartition.normalized(np.array(coords, dtype=float))
    h = canonicalize(step_from_sphere(p))
    print(coords, "->", h, "cell", cell_of(h))

# Opposite points give opposite step functions.
p = SignedPartition.normalized(np.array([0.3, -0.5, 0.8]))
a, b = step_from_sphere(p), step_from_sphere(-p)
print("h(-x) = -h(x):", a.l1_distance(-b) == 0.0)

# The faces of a cell: a vanishing first length flips the leading sign.
x = np.array([0.2, 0.5, 0.3])
face = canonicalize(cell_step(np.concatenate([[0.0], x]), 1))
print("first face L1 distance:", face.l1_distance(canonicalize(cell_step(x, -1))))
