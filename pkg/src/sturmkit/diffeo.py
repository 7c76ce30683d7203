"""Orientation-preserving circle diffeomorphisms.

Maps are handled through their lifts ``phi: R -> R`` with
``phi(x + period) = phi(x) + period``.  Constructed maps are periodic
monotone cubic (PCHIP) splines through breakpoint/image pairs; compositions
and inverses are kept as exact functional compositions.
"""

import json
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import (
    NoStableNeighborhood,
    PeriodMismatch,
    PreconditionError,
    TrustRegionExceeded,
)
from .fncore import CircleFunction, write_csv
from .fncore.functions import _same_period

_COPIES = 3


class CircleDiffeo:
    """Lift of an orientation-preserving circle homeomorphism.

    Parameters
    ----------
    lift, derivative, inverse : callable
        Vectorized callables on all of R.  ``inverse`` is the lift of the
        inverse map.
    period : float
    kinks : array_like
        Points of ``[0, period)`` where the lift is only C^1.
    """

    def __init__(self, lift, derivative, inverse, period, kinks=(), label=None):
        self.period = float(period)
        self._lift = lift
        self._deriv = derivative
        self._inv = inverse
        k = np.mod(np.asarray(kinks, dtype=float).ravel(), self.period)
        k[self.period - k < 1e-14 * self.period] = 0.0
        self.kinks = np.unique(k)
        self.label = label

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.asarray(self._lift(x), dtype=float)
        return float(out) if out.ndim == 0 else out

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        out = np.asarray(self._deriv(x), dtype=float)
        return float(out) if out.ndim == 0 else out

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        out = np.asarray(self._inv(y), dtype=float)
        return float(out) if out.ndim == 0 else out

    @property
    def breakpoints(self):
        return self.kinks.copy()

    @property
    def images(self):
        return self(self.kinks)

    def min_slope(self, n=4096):
        x = np.arange(n) * (self.period / n)
        x = np.concatenate([x, self.kinks])
        return float(np.min(self.derivative(x)))

    def header(self):
        return {
            "period": self.period,
            "breakpoints": [float(b) for b in self.breakpoints],
            "images": [float(v) for v in self.images],
        }

    def to_csv(self, path, n=1024):
        """Write ``x,phi(x)`` on a uniform grid of ``n`` nodes."""
        x = np.arange(n) * (self.period / n)
        write_csv(path, ("x", "phi(x)"), np.column_stack([x, self(x)]))

    def save(self, stem, n=1024):
        """Write ``<stem>.csv`` and its JSON header ``<stem>.json``."""
        self.to_csv(f"{stem}.csv", n)
        from .io import dumps_json

        with open(f"{stem}.json", "w") as fh:
            fh.write(dumps_json(self.header()))

    def __repr__(self):
        return (f"CircleDiffeo({self.label or 'map'}, period={self.period:.6g},"
                f" {len(self.kinks)} kinks)")


def _periodic_pchip(period, b, v):
    shifts = np.arange(-_COPIES, _COPIES + 1) * period
    xe = (b[None, :] + shifts[:, None]).ravel()
    ye = (v[None, :] + shifts[:, None]).ravel()
    return PchipInterpolator(xe, ye, extrapolate=True), xe, ye


def from_breakpoints(period, breakpoints, images, label=None):
    """Periodic monotone-cubic diffeomorphism through breakpoint images.

    ``breakpoints`` and ``images`` are increasing lifts; each must span less
    than one period.  Between breakpoints the lift is the PCHIP interpolant,
    which is C^1 and strictly increasing for strictly increasing data.
    """
    period = float(period)
    b = np.asarray(breakpoints, dtype=float).ravel()
    v = np.asarray(images, dtype=float).ravel()
    if b.shape != v.shape or b.size == 0:
        raise ValueError("breakpoints and images must be nonempty and match")
    if np.any(np.diff(b) <= 0) or b[-1] - b[0] >= period:
        raise ValueError("breakpoints must increase within one period")
    if np.any(np.diff(v) <= 0) or v[-1] - v[0] >= period:
        raise ValueError("images must increase within one period")
    q = np.floor(b[0] / period)
    b = b - q * period
    v = v - q * period
    interp, xe, ye = _periodic_pchip(period, b, v)
    dinterp = interp.derivative()
    b0, v0 = b[0], v[0]

    def lift(x):
        q = np.floor((x - b0) / period)
        return interp(x - q * period) + q * period

    def deriv(x):
        q = np.floor((x - b0) / period)
        return dinterp(x - q * period)

    def inverse(y):
        y = np.asarray(y, dtype=float)
        q = np.floor((y - v0) / period)
        yr = y - q * period
        j = np.clip(np.searchsorted(ye, yr, side="right") - 1, 0, len(ye) - 2)
        lo = xe[j].astype(float)
        hi = xe[j + 1].astype(float)
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            below = interp(mid) < yr
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        x = 0.5 * (lo + hi)
        for _ in range(2):
            d = dinterp(x)
            step = (interp(x) - yr) / np.where(d > 0, d, 1.0)
            x = np.clip(x - step, xe[j], xe[j + 1])
        return x + q * period

    phi = CircleDiffeo(lift, deriv, inverse, period, kinks=b, label=label)
    phi._nodes = (b.copy(), v.copy())
    return phi


def identity(period):
    return CircleDiffeo(lambda x: np.asarray(x, dtype=float) + 0.0,
                        lambda x: np.ones_like(np.asarray(x, dtype=float)),
                        lambda y: np.asarray(y, dtype=float) + 0.0,
                        period, label="identity")


def rotation(a, period):
    a = float(a)
    return CircleDiffeo(lambda x: np.asarray(x, dtype=float) + a,
                        lambda x: np.ones_like(np.asarray(x, dtype=float)),
                        lambda y: np.asarray(y, dtype=float) - a,
                        period, label=f"rotation({a:.6g})")


def _require_same(phi, psi):
    if not _same_period(phi.period, psi.period):
        raise PeriodMismatch(phi.period, psi.period)


def compose(phi, psi):
    """The map ``x -> phi(psi(x))``."""
    _require_same(phi, psi)
    kinks = np.concatenate([psi.kinks, psi.inverse(phi.kinks)])
    return CircleDiffeo(
        lambda x: phi(psi(x)),
        lambda x: phi.derivative(psi(x)) * psi.derivative(x),
        lambda y: psi.inverse(phi.inverse(y)),
        phi.period, kinks, label=f"({phi.label})o({psi.label})")


def invert(phi):
    return CircleDiffeo(
        phi.inverse,
        lambda y: 1.0 / phi.derivative(phi.inverse(y)),
        phi.__call__,
        phi.period, phi(phi.kinks), label=f"inv({phi.label})")


def pullback(f, phi):
    """The function ``f o phi``, with kinks carried over."""
    if not _same_period(f.period, phi.period):
        raise PeriodMismatch(f.period, phi.period)
    kinks = np.concatenate([phi.kinks, phi.inverse(f.kinks)])
    return CircleFunction(lambda x: f(phi(x)), f.period, kinks,
                          label=f"pullback({f!r})")


@dataclass(frozen=True)
class AlphaFamily:
    """Finite-dimensional family of maps moving ``breakpoints[i]`` to
    ``breakpoints[i] + alpha[i]`` while fixing ``anchor``.

    ``delta`` defaults to a quarter of the smallest gap between consecutive
    points of ``anchor, breakpoints..., anchor + period``.
    """

    breakpoints: tuple
    period: float
    anchor: float = 0.0
    delta: float = None

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float)
        object.__setattr__(self, "breakpoints", tuple(float(t) for t in b))
        pts = np.concatenate([[self.anchor], b, [self.anchor + self.period]])
        gaps = np.diff(pts)
        if np.any(gaps <= 0):
            raise ValueError("breakpoints must increase strictly inside "
                             "(anchor, anchor + period)")
        if self.delta is None:
            object.__setattr__(self, "delta", 0.25 * float(gaps.min()))

    @property
    def dimension(self):
        return len(self.breakpoints)

    @property
    def min_gap(self):
        pts = np.concatenate([[self.anchor], self.breakpoints,
                              [self.anchor + self.period]])
        return float(np.diff(pts).min())


def psi_alpha(family, alpha):
    """Member of the family with breakpoint shifts ``alpha``."""
    alpha = np.asarray(alpha, dtype=float).ravel()
    if alpha.shape != (family.dimension,):
        raise ValueError(f"alpha must have {family.dimension} components")
    if np.any(np.abs(alpha) >= family.delta):
        raise TrustRegionExceeded(
            f"|alpha| = {np.max(np.abs(alpha)):.3g} >= delta = "
            f"{family.delta:.3g}")
    b = np.concatenate([[family.anchor], family.breakpoints])
    v = b + np.concatenate([[0.0], alpha])
    return from_breakpoints(family.period, b, v, label="psi_alpha")


def _neighborhood_radius(f, p, target, band, cap, n_scan=4096):
    """Largest r <= cap with |f - target| < band on [p - r, p + r]."""
    if not abs(f(p) - target) < band:
        return 0.0
    r = cap * np.arange(1, n_scan + 1) / n_scan
    bad = (np.abs(f(p - r) - target) >= band) | (np.abs(f(p + r) - target) >= band)
    if not bad.any():
        return float(cap)
    j = int(np.argmax(bad))
    lo = 0.0 if j == 0 else r[j - 1]
    hi = r[j]
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        ok = (abs(f(p - mid) - target) < band) and (abs(f(p + mid) - target) < band)
        if ok:
            lo = mid
        else:
            hi = mid
    return float(lo)


def build_stretch_to_step(f, points, h, eps, band=0.1):
    """Stretch map taking ``f`` close in measure to a ±1 step function.

    Parameters
    ----------
    f : CircleFunction
        Normalized so that ``f(points[k]) == h.signs[k]``.
    points : array_like
        One lifted, increasing point per interval of ``h``.
    h : StepFunction
        Circle step function on ``[0, f.period)`` whose signs alternate
        around the circle.
    eps : float
        Measure budget: ``|f(phi(x)) - h(x)| < band`` except on a set of
        measure ``eps / 2``.
    band : float
        Plateau tolerance; 0.1 is the value used by the measure test.

    Each interval of ``h``, shrunk by ``eps / (4 K)`` at both ends (``K``
    intervals), is mapped into ``[p_k - eta_k, p_k + eta_k]`` where
    ``eta_k`` is the largest radius keeping ``|f - f(p_k)|`` below ``band``.
    The short transition zones absorb everything in between.
    """
    period = f.period
    if not _same_period(period, h.length):
        raise PeriodMismatch(period, h.length)
    edges = np.asarray(h.edges, dtype=float)
    signs = np.asarray(h.signs, dtype=float)
    K = len(signs)
    p = np.asarray(points, dtype=float).ravel()
    if len(p) != K:
        raise PreconditionError(
            f"need one point per step interval ({K}), got {len(p)}")
    if K > 1 and np.any(signs * np.roll(signs, -1) > 0):
        raise PreconditionError("step function signs must alternate around "
                                "the circle")
    if np.any(np.diff(p) <= 0) or p[-1] - p[0] >= period:
        raise PreconditionError("points must be increasing lifts within one "
                                "period")
    if not eps > 0:
        raise ValueError("eps must be positive")
    margin = eps / (4 * K)
    lengths = np.diff(edges)
    if margin >= 0.25 * lengths.min():
        raise PreconditionError("eps too large for the step intervals")

    gaps = np.diff(np.concatenate([p, [p[0] + period]]))
    eta = np.empty(K)
    for k in range(K):
        cap = 0.4 * min(gaps[k], gaps[k - 1])
        eta[k] = _neighborhood_radius(f, p[k], signs[k], band, cap)
        if eta[k] < 1e-9:
            raise NoStableNeighborhood(
                f"no neighborhood of x={p[k]:.6g} keeps f within {band} of "
                f"{signs[k]:+g} (f there is {f(p[k]):.6g})")

    dom = np.empty(2 * K)
    img = np.empty(2 * K)
    dom[0::2] = edges[:-1] + margin
    dom[1::2] = edges[1:] - margin
    img[0::2] = p - eta
    img[1::2] = p + eta
    phi = from_breakpoints(period, dom, img, label="stretch")
    phi.eta = eta
    phi.margin = margin
    return phi


def load_header(path):
    """Rebuild a spline diffeomorphism from its JSON header."""
    with open(path) as fh:
        hdr = json.load(fh)
    return from_breakpoints(hdr["period"], hdr["breakpoints"], hdr["images"])
