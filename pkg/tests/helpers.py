"""Shared constructors for the test suite."""

import numpy as np

from sturmkit.diffeo import from_breakpoints


def random_stretch(rng, period=2 * np.pi, nodes=6, spread=0.6):
    """Random spline diffeomorphism with ``nodes`` breakpoints."""
    b = np.sort(rng.uniform(0, period, nodes))
    while np.min(np.diff(np.concatenate([b, [b[0] + period]]))) < 0.02 * period:
        b = np.sort(rng.uniform(0, period, nodes))
    gaps = np.diff(np.concatenate([b, [b[0] + period]]))
    new = gaps * np.exp(rng.uniform(-spread, spread, nodes))
    new *= period / new.sum()
    v = b[0] + rng.uniform(-0.1, 0.1) + np.concatenate([[0], np.cumsum(new[:-1])])
    return from_breakpoints(period, b, v)


def random_trig_text(rng, harmonics, scale=1.0):
    """Expression text for a random combination of ``cos(m x), sin(m x)``."""
    terms = []
    for m in harmonics:
        a, b = scale * rng.standard_normal(2)
        terms.append(f"{float(a)!r}*cos({m}*x)+{float(b)!r}*sin({m}*x)")
    return "+".join(terms)
