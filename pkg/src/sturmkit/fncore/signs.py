"""Sign-change counting and alternation points of periodic functions."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from ..errors import AllNeutral, InsufficientSignChanges, PreconditionError

ABSCISSA_TOL = 1e-12


@dataclass(frozen=True)
class SignChangeReport:
    """Result of :func:`count_sign_changes`.

    ``locations`` are increasing points of ``[0, period)`` at which the sign
    of the function flips (within 1e-12); ``count == len(locations)``.
    """

    count: int
    locations: np.ndarray
    tol: float
    period: float


def probe_grid(f, n=1024, min_per_segment=16):
    """Scan grid over one period: ``n`` uniform nodes, refined so that every
    smooth segment between kinks of ``f`` carries at least
    ``min_per_segment`` nodes."""
    period = f.period
    edges = np.concatenate([f.kinks, [period]])
    parts = []
    for a, b in zip(edges[:-1], edges[1:]):
        m = max(min_per_segment, int(np.ceil(n * (b - a) / period)))
        parts.append(a + (b - a) * np.arange(m) / m)
    return np.concatenate(parts)


def _bisect_exit(f, lo, hi, sign, tol):
    """Vectorized bisection: ``sign * f > tol`` holds at ``lo`` and fails at
    ``hi``; shrink each bracket to ``ABSCISSA_TOL``."""
    lo = lo.copy()
    hi = hi.copy()
    while np.max(hi - lo) > ABSCISSA_TOL:
        mid = 0.5 * (lo + hi)
        inside = sign * f(mid) > tol
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
        if np.all(mid == lo) and np.all(mid == hi):
            break
    return 0.5 * (lo + hi)


def count_sign_changes(f, tol=0.0, n_grid=1024):
    """Count sign changes of a periodic function around the whole circle.

    Values with ``|f| <= tol`` are neutral: they neither start nor break a
    sign run, so tangential zeros are not counted.

    Raises
    ------
    AllNeutral
        If every probe value is neutral.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    period = f.period
    x = probe_grid(f, n_grid)
    v = f(x)
    keep = np.abs(v) > tol
    if not keep.any():
        raise AllNeutral("function is neutral on the whole probe grid")
    xs = x[keep]
    s = np.sign(v[keep])
    nxt_s = np.roll(s, -1)
    nxt_x = np.roll(xs, -1)
    nxt_x[-1] += period
    flip = s != nxt_s
    if not flip.any():
        return SignChangeReport(0, np.empty(0), float(tol), period)
    loc = _bisect_exit(f, xs[flip], nxt_x[flip], s[flip], tol)
    loc = np.mod(loc, period)
    loc[period - loc < ABSCISSA_TOL] = 0.0
    loc = np.sort(loc)
    return SignChangeReport(int(len(loc)), loc, float(tol), period)


def _run_peak(f, a, b, sign):
    """Location and value of max(sign * f) over the open run (a, b)."""
    t = np.linspace(a, b, 257)[1:-1]
    v = sign * f(t)
    i = int(np.argmax(v))
    lo = t[max(i - 1, 0)]
    hi = t[min(i + 1, len(t) - 1)]
    res = minimize_scalar(lambda u: -sign * f(u), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-13})
    if -res.fun > v[i]:
        return float(res.x), float(-res.fun)
    return float(t[i]), float(v[i])


def find_alternation_points(f, m, c_hint=None):
    """Find ``c > 0`` and ``m`` increasing points where ``f`` takes the
    alternating values ``+c, -c, +c, ...``.

    The points are taken from ``m`` consecutive sign runs (the block whose
    smallest run maximum is largest).  Each point lies in its own run and is
    located by bisection to 1e-12; when ``c`` equals a run maximum the
    maximizer itself is returned.  Points are given as lifts: the first lies
    in ``[0, period)`` and the rest increase from it (possibly past
    ``period``).

    Without ``c_hint``, ``c`` is half the smallest run maximum.
    """
    if m <= 0 or m % 2:
        raise ValueError("m must be a positive even integer")
    report = count_sign_changes(f, 0.0)
    if report.count < m:
        raise InsufficientSignChanges(report.count, m)
    period = f.period
    loc = report.locations
    starts = loc
    ends = np.concatenate([loc[1:], [loc[0] + period]])
    runs = []
    for a, b in zip(starts, ends):
        mid = np.linspace(a, b, 65)[1:-1]
        vals = f(mid)
        sign = 1.0 if vals[np.argmax(np.abs(vals))] > 0 else -1.0
        xp, peak = _run_peak(f, a, b, sign)
        runs.append((a, b, sign, xp, peak))

    k = len(runs)
    best = None
    for i in range(k):
        if runs[i][2] < 0:
            continue
        block = [runs[(i + j) % k] for j in range(m)]
        score = min(r[4] for r in block)
        if best is None or score > best[0]:
            best = (score, i, block)
    min_peak, first, block = best

    if c_hint is None:
        c = min(0.5 * min_peak, 0.9 * min_peak)
    else:
        c = float(c_hint)
        if not c > 0:
            raise PreconditionError("c_hint must be positive")
        if c > min_peak * (1 + 1e-12) + 1e-15:
            raise PreconditionError(
                f"level c={c:.6g} is not attained on every run "
                f"(smallest run maximum {min_peak:.6g})")

    points = []
    for a, b, sign, xp, peak in block:
        if peak - c <= 1e-12 * max(1.0, c):
            points.append(xp)
            continue
        lo, hi = a, xp
        while hi - lo > ABSCISSA_TOL:
            mid = 0.5 * (lo + hi)
            if sign * f(mid) >= c:
                hi = mid
            else:
                lo = mid
            if mid in (lo, hi) and hi - lo <= 4 * np.spacing(hi):
                break
        points.append(0.5 * (lo + hi))
    points = np.asarray(points)
    x0 = np.mod(points[0], period)
    lifted = x0 + np.mod(points - points[0], period)
    lifted[1:] = np.where(lifted[1:] <= lifted[0], lifted[1:] + period,
                          lifted[1:])
    return c, lifted
