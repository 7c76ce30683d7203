"""Hill equation ``gamma'' = -k gamma`` with pi-periodic potential, its
monodromy in SL(2, R), and the converse Ghys solver.

Frame convention: ``F = (gamma, gamma')`` as columns and ``F' = F A`` with
``A = [[0, -k], [1, 0]]``; a frame path is accumulated by right
multiplication.  The curve closes up (and is centrally symmetric) iff the
monodromy ``F(0)^{-1} F(pi)`` equals ``-E``.

A diffeomorphism ``g`` of RP^1 in the angular coordinate lifts to the
plane as ``(x, r) -> (g(x), r g'(x)^{-1/2})``; the image of the unit circle
solves the Hill equation with ``k = S(g) / 2 + 1`` where ``S`` is the
projective Schwarzian in the angular coordinate (see :func:`schwarzian`).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as C

from ._newton import newton_box
from .diffeo import (
    AlphaFamily,
    build_stretch_to_step,
    compose,
    invert,
    psi_alpha,
    pullback,
)
from .errors import (
    BracketFailure,
    ConvergenceFailure,
    CurveNotClosed,
    DegenerateJacobian,
    DerivativeUnderflow,
    InsufficientSignChanges,
    NonPositiveK,
    OriginHit,
    PreconditionError,
    TrustRegionExceeded,
)
from .fncore import CircleFunction, count_sign_changes, find_alternation_points, write_csv
from .io import svg_curve
from .stepspace import StepFunction

PI = math.pi
E = np.eye(2)


# -- SL(2, R) ---------------------------------------------------------------

def is_sl2(M, tol=1e-10):
    M = np.asarray(M, dtype=float)
    return M.shape == (2, 2) and abs(np.linalg.det(M) - 1.0) < tol


def generator(k):
    """``A = [[0, -k], [1, 0]]`` (vectorized over ``k``)."""
    k = np.asarray(k, dtype=float)
    A = np.zeros(k.shape + (2, 2))
    A[..., 0, 1] = -k
    A[..., 1, 0] = 1.0
    return A


def rotation_exp(k, t):
    """Closed-form ``exp(t A)`` for ``A = [[0, -k], [1, 0]]``."""
    k = float(k)
    t = float(t)
    if k > 0:
        w = math.sqrt(k)
        c, s = math.cos(w * t), math.sin(w * t)
        return np.array([[c, -w * s], [s / w, c]])
    if k < 0:
        w = math.sqrt(-k)
        c, s = math.cosh(w * t), math.sinh(w * t)
        return np.array([[c, w * s], [s / w, c]])
    return np.array([[1.0, 0.0], [t, 1.0]])


def sl2_exp(X):
    """Exponential of traceless 2x2 matrices (vectorized over leading axes)."""
    X = np.asarray(X, dtype=float)
    q = X[..., 0, 0] ** 2 + X[..., 0, 1] * X[..., 1, 0]
    s = np.sqrt(np.abs(q))
    pos = q > 0
    cos_part = np.where(pos, np.cosh(s), np.cos(s))
    with np.errstate(invalid="ignore", divide="ignore"):
        sin_part = np.where(pos, np.sinh(s), np.sin(s)) / s
    sin_part = np.where(s == 0, 1.0, sin_part)
    return cos_part[..., None, None] * E + sin_part[..., None, None] * X


def sl2_log(X):
    """Logarithm of ``X`` in SL(2, R) near the identity, traceless."""
    X = np.asarray(X, dtype=float)
    tau = 0.5 * np.trace(X)
    if tau <= 0:
        raise PreconditionError("matrix is too far from the identity for the "
                                "principal logarithm")
    N = X - tau * E
    qn = N[0, 0] ** 2 + N[0, 1] * N[1, 0]
    s = math.sqrt(abs(qn))
    if s == 0.0:
        return N
    theta = math.asinh(s) if qn > 0 else math.asin(min(s, 1.0))
    return (theta / s) * N


def sl2_coords(X):
    """Coordinates ``(a, b, c)`` of ``[[a, b], [c, -a]]``."""
    X = np.asarray(X, dtype=float)
    return np.array([0.5 * (X[0, 0] - X[1, 1]), X[0, 1], X[1, 0]])


def _ordered_product(mats):
    """``mats[..., 0, :, :] @ mats[..., 1, :, :] @ ...`` along axis -3."""
    while mats.shape[-3] > 1:
        m = mats.shape[-3]
        if m % 2:
            last = mats[..., -1:, :, :]
            pairs = mats[..., :-1, :, :]
        else:
            last = None
            pairs = mats
        prod = pairs[..., 0::2, :, :] @ pairs[..., 1::2, :, :]
        mats = prod if last is None else np.concatenate([prod, last], axis=-3)
    return mats[..., 0, :, :]


# -- step potentials --------------------------------------------------------

@dataclass(frozen=True)
class StepPotential:
    """pi-periodic piecewise constant potential."""

    values: tuple
    lengths: tuple

    def __post_init__(self):
        v = tuple(float(a) for a in self.values)
        t = tuple(float(a) for a in self.lengths)
        if len(v) != len(t) or not v:
            raise ValueError("need one length per value")
        if any(a <= 0 for a in t):
            raise ValueError("lengths must be positive")
        if abs(sum(t) - PI) > 1e-12:
            raise ValueError(f"lengths must sum to pi (sum is {sum(t)!r})")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "lengths", t)

    @property
    def edges(self):
        e = np.concatenate([[0.0], np.cumsum(self.lengths)])
        e[-1] = PI
        return e

    def __call__(self, x):
        x = np.mod(np.asarray(x, dtype=float), PI)
        k = np.clip(np.searchsorted(self.edges, x, side="right") - 1, 0,
                    len(self.values) - 1)
        out = np.asarray(self.values)[k]
        return float(out) if out.ndim == 0 else out

    def as_circle_function(self):
        return CircleFunction(self.__call__, PI, self.edges[:-1],
                              label=f"step potential {self.values}")


def monodromy(p):
    """``exp(t_1 A_1) exp(t_2 A_2) ...`` accumulated left to right."""
    M = E.copy()
    for k, t in zip(p.values, p.lengths):
        M = M @ rotation_exp(k, t)
    return M


@dataclass(frozen=True)
class TanSolution:
    alpha: float
    beta: float
    t1: float
    t2: float
    k1: float
    k2: float

    def potential(self):
        return StepPotential((self.k1, self.k2, self.k1, self.k2),
                             (self.t1, self.t2, self.t1, self.t2))


def solve_tan_equation(k1, k2, tol=1e-12):
    """Symmetric four-interval potential ``k1, k2, k1, k2`` with closing
    monodromy.

    With ``t3 = t1``, ``t4 = t2`` and ``alpha = t1 sqrt(k1)``,
    ``beta = t2 sqrt(k2)``, closure reduces to
    ``tan(alpha) tan(beta) = sqrt(k1 k2)`` (for ``k1 + k2 = 2``) under
    ``alpha / sqrt(k1) + beta / sqrt(k2) = pi / 2``, solved by bisection
    in ``alpha``.  (The trace of the half-period product vanishes iff
    ``tan(alpha) tan(beta) = 2 sqrt(k1 k2) / (k1 + k2)``, which is
    ``sqrt(k1 k2)`` when ``k1 + k2 = 2``.)

    Raises
    ------
    NonPositiveK
    BracketFailure
        The left-hand side does not cross the right-hand side on
        ``(0, min(pi/2, sqrt(k1) pi/2))``.
    """
    k1 = float(k1)
    k2 = float(k2)
    if k1 <= 0 or k2 <= 0:
        raise NonPositiveK(f"k1={k1}, k2={k2}: both values must be positive")
    r1, r2 = math.sqrt(k1), math.sqrt(k2)
    rhs = 2.0 * math.sqrt(k1 * k2) / (k1 + k2)

    def beta(a):
        return r2 * (0.5 * PI - a / r1)

    def G(a):
        return math.tan(a) * math.tan(beta(a)) - rhs

    lo = 0.0
    hi = min(0.5 * PI, r1 * 0.5 * PI)
    mid = 0.5 * (lo + hi)
    if abs(G(mid)) < tol:
        a = mid
    else:
        guard = 1e-9 * hi
        g_lo, g_hi = G(lo + guard), G(hi - guard)
        inside = (0 < beta(hi - guard) and beta(lo + guard) < 0.5 * PI)
        if not inside or not (g_lo < 0 < g_hi):
            raise BracketFailure(
                f"no closing length split for "
                f"k1={k1}, k2={k2}")
        lo, hi = lo + guard, hi - guard
        a = 0.5 * (lo + hi)
        for _ in range(200):
            a = 0.5 * (lo + hi)
            g = G(a)
            if abs(g) < tol or hi - lo < 1e-16:
                break
            if g < 0:
                lo = a
            else:
                hi = a
    b = beta(a)
    if abs(G(a)) >= tol:
        raise BracketFailure(f"bisection stalled at residual {G(a):.3e}")
    t1 = a / r1
    t2 = 0.5 * PI - t1
    return TanSolution(a, b, t1, t2, k1, k2)


@dataclass
class MonodromyJacobian:
    """Derivative of the monodromy with respect to the interval lengths.

    ``columns[i] = dM / dt_i = L_i A_i L_i^{-1} M`` where ``L_i`` is the
    partial product to the left of interval ``i``.
    """

    columns: np.ndarray
    monodromy: np.ndarray

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return np.tensordot(s, self.columns, axes=1)

    @property
    def matrix(self):
        """``3 x m`` matrix of sl2 coordinates of the columns."""
        return np.column_stack([sl2_coords(c) for c in self.columns])

    @property
    def hyperplane_basis(self):
        m = len(self.columns)
        H = np.zeros((m, m - 1))
        for j in range(m - 1):
            H[j, j] = 1.0
            H[j + 1, j] = -1.0
        return H

    @property
    def restricted(self):
        """The map restricted to stretches with zero total length change."""
        return self.matrix @ self.hyperplane_basis

    def singular_values(self):
        return np.linalg.svd(self.restricted, compute_uv=False)


def monodromy_jacobian(p, closure_tol=1e-8, rank_tol=1e-9):
    """Exact product-rule derivative of the monodromy at a closing step
    potential.

    Raises
    ------
    PreconditionError
        The monodromy is not ``-E``.
    DegenerateJacobian
        The restriction to ``sum(s) = 0`` has rank below 3.
    """
    M = monodromy(p)
    if np.max(np.abs(M + E)) >= closure_tol:
        raise PreconditionError("monodromy of the step potential is not -E "
                                f"(error {np.max(np.abs(M + E)):.2e})")
    cols = []
    L = E.copy()
    for k, t in zip(p.values, p.lengths):
        A = generator(k)
        cols.append(L @ A @ np.linalg.inv(L) @ M)
        L = L @ rotation_exp(k, t)
    J = MonodromyJacobian(np.array(cols), M)
    sv = J.singular_values()
    if len(sv) < 3 or sv[2] < rank_tol:
        raise DegenerateJacobian(
            f"monodromy differential has rank < 3 (singular values {sv})")
    return J


# -- integration ------------------------------------------------------------

_G1 = 0.5 - math.sqrt(3) / 6
_G2 = 0.5 + math.sqrt(3) / 6


def _magnus_steps(gen, lo, hi, n):
    """Propagators of ``F' = F gen(x)`` over each ``[lo_i, hi_i]`` using
    ``n`` fourth-order Magnus steps."""
    h = (hi - lo) / n
    j = np.arange(n)
    left = lo[:, None] + h[:, None] * j[None, :]
    A1 = gen((left + _G1 * h[:, None]).ravel()).reshape(left.shape + (2, 2))
    A2 = gen((left + _G2 * h[:, None]).ravel()).reshape(left.shape + (2, 2))
    hh = h[:, None, None, None]
    omega = 0.5 * hh * (A1 + A2) + (math.sqrt(3) / 12) * hh ** 2 * (
        A1 @ A2 - A2 @ A1)
    return _ordered_product(sl2_exp(omega))


def propagators(gen, lo, hi, tol=1e-14, n0=2, max_doublings=12):
    """Adaptive propagators over the intervals ``[lo_i, hi_i]``: the number
    of Magnus steps is doubled until two successive results agree."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = n0
    out = _magnus_steps(gen, lo, hi, n)
    active = np.arange(len(lo))
    for _ in range(max_doublings):
        n *= 2
        finer = _magnus_steps(gen, lo[active], hi[active], n)
        err = np.max(np.abs(finer - out[active]), axis=(1, 2))
        out[active] = finer
        active = active[err > tol]
        if len(active) == 0:
            break
    return out


def _segment_edges(kinks, period):
    e = np.unique(np.concatenate([np.mod(kinks, period), [0.0]]))
    return np.concatenate([e, [period]])


def monodromy_of(gen, kinks, period=PI):
    """Monodromy over one period of a generator that is smooth between the
    kinks."""
    e = _segment_edges(kinks, period)
    P = propagators(gen, e[:-1], e[1:])
    M = E.copy()
    for step in P:
        M = M @ step
    return M


def potential_generator(k):
    return lambda x: generator(k(x))


@dataclass
class PlaneCurve:
    """Frame path ``F(x) = (gamma(x), gamma'(x))`` on ``[0, pi]``.

    Nodes are Chebyshev-Lobatto points of ``degree`` on each piece
    ``[pieces[p], pieces[p+1]]``; node ``p * degree + j`` is the ``j``-th
    node of piece ``p``.
    """

    x: np.ndarray
    frames: np.ndarray
    pieces: np.ndarray
    degree: int

    @property
    def gamma(self):
        return self.frames[:, :, 0]

    @property
    def dgamma(self):
        return self.frames[:, :, 1]

    def wronskian(self):
        return np.linalg.det(self.frames)

    def closure_error(self):
        g, d = self.gamma, self.dgamma
        return (float(np.linalg.norm(g[-1] + g[0])),
                float(np.linalg.norm(d[-1] + d[0])))

    def to_csv(self, path):
        write_csv(path, ("x", "gx", "gy", "dgx", "dgy"),
                  np.column_stack([self.x, self.gamma, self.dgamma]))

    def to_svg(self, path):
        g = self.gamma
        svg_curve([(g[:, 0], g[:, 1], "gamma"), (-g[:, 0], -g[:, 1], "-gamma")],
                  path, title="closed centrally symmetric curve")


def _lobatto(degree):
    return -np.cos(np.pi * np.arange(degree + 1) / degree)


def _pieces(kinks, grid, degree, period=PI):
    e = _segment_edges(kinks, period)
    max_len = period * degree / grid
    out = [0.0]
    for a, b in zip(e[:-1], e[1:]):
        m = max(1, int(math.ceil((b - a) / max_len - 1e-12)))
        out.extend(a + (b - a) * np.arange(1, m + 1) / m)
    out = np.asarray(out)
    out[-1] = period
    return out


def _frames_on(k, F0, pieces, degree):
    ref = _lobatto(degree)
    a, b = pieces[:-1], pieces[1:]
    x = (0.5 * (a + b)[:, None] + 0.5 * (b - a)[:, None] * ref[None, :])
    x[:, 0] = a
    x[:, -1] = b
    nodes = np.concatenate([x[:, :-1].ravel(), [pieces[-1]]])
    P = propagators(potential_generator(k), nodes[:-1], nodes[1:])
    frames = np.empty((len(nodes), 2, 2))
    F = F0.copy()
    frames[0] = F
    for i, step in enumerate(P):
        F = F @ step
        F /= math.sqrt(np.linalg.det(F))
        frames[i + 1] = F
    return PlaneCurve(nodes, frames, pieces, degree)


def _unresolved(curve, tol):
    """Pieces on which the angular speed ``|gamma|^-2`` or its derivative
    is not resolved by the piecewise Chebyshev interpolant."""
    g, d = curve.gamma, curve.dgamma
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = np.sum(g * g, axis=1)
        d1 = 1.0 / r2
        d2 = -2.0 * np.sum(g * d, axis=1) / r2 ** 2
    if not (np.all(np.isfinite(d1)) and np.all(np.isfinite(d2))):
        return np.zeros(len(curve.pieces) - 1, dtype=bool)
    D = curve.degree
    n = len(curve.pieces) - 1
    idx = np.arange(n)[:, None] * D + np.arange(D + 1)[None, :]
    ref = _lobatto(D)
    bad = np.zeros(n, dtype=bool)
    for v in (d1, d2 / max(1.0, np.max(np.abs(d2)) / np.max(d1))):
        coef = C.chebfit(ref, v[idx].T, D)
        bad |= np.max(np.abs(coef[-2:]), axis=0) > tol * np.max(d1)
    return bad


def integrate_frame(k, F0=None, grid=2048, degree=16, resolve_tol=1e-12,
                    max_rounds=12):
    """Integrate ``F' = F A(k)`` over ``[0, pi]`` from ``F(0) = F0``.

    Fourth-order Magnus steps (adaptive inside each node interval); the
    determinant is renormalized to 1 after every node.  Nodes are
    Chebyshev-Lobatto points on pieces no longer than ``pi * degree / grid``,
    with piece edges at the kinks of ``k``.  Pieces on which the angular
    speed ``|gamma|^-2`` is not resolved to ``resolve_tol`` (the curve
    passes close to the origin) are bisected, up to ``max_rounds`` times.
    """
    if grid < 256:
        raise ValueError("grid must be >= 256")
    F0 = E.copy() if F0 is None else np.asarray(F0, dtype=float)
    pieces = _pieces(k.kinks, grid, degree, k.period)
    curve = _frames_on(k, F0, pieces, degree)
    for _ in range(max_rounds):
        bad = _unresolved(curve, resolve_tol)
        bad &= np.diff(pieces) > 1e-7
        if not bad.any():
            break
        mids = 0.5 * (pieces[:-1] + pieces[1:])[bad]
        pieces = np.sort(np.concatenate([pieces, mids]))
        curve = _frames_on(k, F0, pieces, degree)
    return curve


# -- projective diffeomorphisms and the Schwarzian --------------------------

def _clenshaw(t, coef):
    """Evaluate Chebyshev series with per-point coefficients ``coef[:, i]``
    at ``t[i]``."""
    b1 = np.zeros_like(t)
    b2 = np.zeros_like(t)
    for c in coef[:0:-1]:
        b1, b2 = 2 * t * b1 - b2 + c, b1
    return t * b1 - b2 + coef[0]


class PiecewiseChebyshev:
    """Piecewise polynomial given by values at Lobatto nodes of each piece."""

    def __init__(self, pieces, values, degree):
        self.pieces = np.asarray(pieces, dtype=float)
        self.degree = degree
        V = np.asarray(values, dtype=float).reshape(len(self.pieces) - 1,
                                                     degree + 1)
        self.coef = C.chebfit(_lobatto(degree), V.T, degree)

    @classmethod
    def _from_coef(cls, pieces, coef, degree):
        obj = cls.__new__(cls)
        obj.pieces = pieces
        obj.degree = degree
        obj.coef = coef
        return obj

    def derivative(self):
        scale = 2.0 / np.diff(self.pieces)
        d = C.chebder(self.coef, axis=0) * scale[None, :]
        d = np.vstack([d, np.zeros((1, d.shape[1]))])
        return PiecewiseChebyshev._from_coef(self.pieces, d, self.degree)

    def piece_integrals(self):
        """Integral over each piece (Clenshaw-Curtis weights of the series)."""
        k = np.arange(self.coef.shape[0])
        w = np.zeros(len(k))
        w[0::2] = 2.0 / (1.0 - k[0::2] ** 2)
        return 0.5 * np.diff(self.pieces) * (w @ self.coef)

    def antiderivative(self, start=0.0):
        """Continuous antiderivative equal to ``start`` at the left end."""
        half = 0.5 * np.diff(self.pieces)
        c = C.chebint(self.coef, lbnd=-1, axis=0) * half[None, :]
        c[0] += start + np.concatenate([[0.0],
                                        np.cumsum(self.piece_integrals())[:-1]])
        return PiecewiseChebyshev._from_coef(self.pieces, c, self.degree + 1)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        p = np.clip(np.searchsorted(self.pieces, x, side="right") - 1, 0,
                    len(self.pieces) - 2)
        a, b = self.pieces[p], self.pieces[p + 1]
        t = np.clip((2 * x - a - b) / (b - a), -1.0, 1.0)
        return _clenshaw(t, self.coef[:, p])


class ProjDiffeo:
    """Lift ``g: R -> R`` of a diffeomorphism of RP^1 in the angular
    coordinate, ``g(x + pi) = g(x) + pi``, with derivatives up to order 3.

    ``body`` and ``derivatives`` act on ``[0, pi)``.
    """

    period = PI

    def __init__(self, body, derivatives):
        self._body = body
        self._derivs = tuple(derivatives)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        q = np.floor(x / PI)
        return self._body(x - q * PI) + q * PI

    def derivative(self, x, order=1):
        if order == 0:
            return self(x)
        x = np.asarray(x, dtype=float)
        return self._derivs[order - 1](np.mod(x, PI))

    @classmethod
    def identity(cls):
        return cls(lambda x: x + 0.0,
                   (np.ones_like, np.zeros_like, np.zeros_like))


def _angle_unwrapped(gamma):
    theta = np.unwrap(np.arctan2(gamma[:, 1], gamma[:, 0]))
    return theta


def recover_diffeo(curve, closure_tol=1e-6, consistency_tol=1e-6):
    """Diffeomorphism ``g`` whose plane lift carries the unit circle onto the
    curve: ``g`` is the unwrapped polar angle of ``gamma`` and
    ``g' = |gamma|^{-2}``.

    ``g'`` and ``g''`` come straight from the frame (``g'' = -2 gamma .
    gamma' / |gamma|^4``); ``g'''`` is the piecewise Chebyshev derivative of
    ``g''``, and ``g`` is the antiderivative of ``g'`` started at the polar
    angle of ``gamma(0)``.  On every piece the increment of the polar angle
    must match the integral of ``|gamma|^{-2}`` to relative
    ``consistency_tol``.

    Raises
    ------
    CurveNotClosed
    OriginHit
    """
    g, d = curve.gamma, curve.dgamma
    r2 = np.sum(g * g, axis=1)
    if np.min(r2) < 1e-24:
        raise OriginHit("curve passes through the origin")
    e0, e1 = curve.closure_error()
    if e0 >= closure_tol or e1 >= closure_tol:
        raise CurveNotClosed(f"|gamma(pi) + gamma(0)| = {e0:.2e}, "
                             f"|gamma'(pi) + gamma'(0)| = {e1:.2e}")
    theta = _angle_unwrapped(g)
    turn = theta[-1] - theta[0]
    if abs(turn - PI) > 1e-6:
        raise CurveNotClosed(f"polar angle advances by {turn:.6g}, not pi")
    D = curve.degree
    n_pieces = len(curve.pieces) - 1
    idx = (np.arange(n_pieces)[:, None] * D + np.arange(D + 1)[None, :]).ravel()
    d1 = 1.0 / r2
    d2 = -2.0 * np.sum(g * d, axis=1) / r2 ** 2
    g1 = PiecewiseChebyshev(curve.pieces, d1[idx], D)
    g2 = PiecewiseChebyshev(curve.pieces, d2[idx], D)
    g3 = g2.derivative()
    # weak form of g' = |gamma|^-2: angle increments against integrals
    inc = g1.piece_integrals()
    err = np.max(np.abs(np.diff(theta[::D]) - inc) / inc)
    if err > consistency_tol:
        raise PreconditionError(
            f"angular speed disagrees with |gamma|^-2 (relative {err:.2e})")
    out = ProjDiffeo(g1.antiderivative(theta[0]), (g1, g2, g3))
    out.angle0 = float(theta[0])
    out.curve = curve
    return out


def classic_schwarzian(d1, d2, d3):
    """``f'''/f' - 3/2 (f''/f')^2`` from derivative values."""
    d1 = np.asarray(d1, dtype=float)
    return d3 / d1 - 1.5 * (d2 / d1) ** 2


def schwarzian(g, probe=4096):
    """Projective Schwarzian of ``g`` in the angular coordinate.

    The affine-chart Schwarzian transported to the angle ``x`` (chart
    ``u = tan x``) is ``S(g) + 2 (g'^2 - 1)``, which vanishes exactly on
    projective maps.

    Raises
    ------
    DerivativeUnderflow
        ``g' < 1e-8`` somewhere on the probe grid.
    """
    xs = np.arange(probe) * (PI / probe)
    if np.min(g.derivative(xs, 1)) < 1e-8:
        raise DerivativeUnderflow("g' < 1e-8: not a diffeomorphism")

    def body(x):
        d1 = g.derivative(x, 1)
        return classic_schwarzian(d1, g.derivative(x, 2),
                                  g.derivative(x, 3)) + 2.0 * (d1 * d1 - 1.0)

    kinks = getattr(getattr(g, "curve", None), "pieces", ())
    return CircleFunction(body, PI, kinks, label="schwarzian")


def potential_of(g):
    """``S(g) / 2 + 1``."""
    S = schwarzian(g)
    return CircleFunction(lambda x: 0.5 * S(x) + 1.0, PI, S.kinks,
                          label="potential")


# -- converse Ghys solver ---------------------------------------------------

def _transport_generator(K, psi):
    def gen(y):
        return generator(K(y)) * psi.derivative(y)[..., None, None]
    return gen


def _stretch_matrix(m):
    """Interval-length change caused by moving the interior breakpoints:
    ``s = T alpha``."""
    T = np.zeros((m, m - 1))
    for j in range(m - 1):
        T[j, j] = 1.0
        T[j + 1, j] = -1.0
    return T


@dataclass
class GhysSolution:
    phi: object
    curve: PlaneCurve
    g: ProjDiffeo
    potential: CircleFunction
    step: StepPotential
    c: float
    alpha: np.ndarray
    eps: float
    iterations: int
    closure: tuple
    schwarzian_residual: float
    attempts: list = field(default_factory=list, repr=False)

    def to_json(self):
        return {
            "c": self.c,
            "k1": self.step.values[0],
            "k2": self.step.values[1],
            "lengths": list(self.step.lengths),
            "alpha": [float(a) for a in self.alpha],
            "eps": self.eps,
            "iterations": self.iterations,
            "closure": {"gamma": self.closure[0], "dgamma": self.closure[1]},
            "schwarzian_residual": self.schwarzian_residual,
        }


def solve_converse_ghys(k, eps_schedule=(1e-2, 1e-3, 1e-4), grid=2048,
                        max_iter=40, c_max=0.3):
    """Reparametrize the pi-periodic potential ``k`` so that the Hill
    curve closes up, and recover the projective diffeomorphism ``g`` with
    ``phi^*(2 (k - 1)) = S(g)``.

    Raises
    ------
    InsufficientSignChanges
        ``k - 1`` changes sign fewer than four times.
    BracketFailure
        Step 1 failed for six successive halvings of ``c``.
    ConvergenceFailure
    """
    if abs(k.period - PI) > 1e-12:
        raise PreconditionError("the potential must have period pi")
    d = k - 1.0
    count = count_sign_changes(d, 0.0).count
    if count < 4:
        raise InsufficientSignChanges(count, 4)
    c_half, _ = find_alternation_points(d, 4)
    c = min(0.9 * 2.0 * c_half, c_max)

    for _ in range(7):
        try:
            tan = solve_tan_equation(1.0 + c, 1.0 - c)
            break
        except BracketFailure:
            c *= 0.5
    else:
        raise BracketFailure("no closing step potential after 6 halvings of c")

    c, points = find_alternation_points(d, 4, c_hint=c)
    step = tan.potential()
    hstep = StepFunction(step.edges, (1, -1, 1, -1))
    fhat = d / c
    family = AlphaFamily(tuple(step.edges[1:-1]), PI)
    T = _stretch_matrix(4)
    J0 = -monodromy_jacobian(step).matrix @ T

    attempts = []
    best = np.inf
    for eps in eps_schedule:
        band = min(0.1, 10.0 * eps)
        phi0 = build_stretch_to_step(fhat, points, hstep, eps, band=band)
        K = pullback(k, phi0)

        def residual(alpha, K=K):
            psi = psi_alpha(family, alpha)
            kinks = np.concatenate([K.kinks, psi.kinks])
            M = monodromy_of(_transport_generator(K, psi), kinks)
            return sl2_coords(sl2_log(-M))

        try:
            res = newton_box(residual, np.zeros(3), J0, family.delta, 1e-12,
                             max_iter=max_iter)
        except (TrustRegionExceeded, PreconditionError) as exc:
            attempts.append({"eps": eps, "reason": str(exc)})
            continue
        attempts.append({"eps": eps, "reason": res.reason,
                         "residual": res.residual,
                         "iterations": res.iterations})
        best = min(best, res.residual)
        if not res.converged:
            continue
        psi = psi_alpha(family, res.x)
        phi = compose(phi0, invert(psi))
        kbar = pullback(k, phi)
        curve = integrate_frame(kbar, E, grid)
        closure = curve.closure_error()
        if max(closure) >= 1e-6:
            attempts[-1]["reason"] = f"curve closure {max(closure):.2e}"
            continue
        try:
            g = recover_diffeo(curve)
        except PreconditionError as exc:
            attempts[-1]["reason"] = str(exc)
            continue
        srel = float(np.max(np.abs(potential_of(g)(curve.x[:-1])
                                   - kbar(curve.x[:-1]))))
        if srel >= 1e-5:
            attempts[-1]["reason"] = f"Schwarzian residual {srel:.2e}"
            best = min(best, srel)
            continue
        return GhysSolution(phi, curve, g, kbar, step, c, res.x, eps,
                            res.iterations, closure, srel, attempts)
    raise ConvergenceFailure("converse Ghys iteration failed for every eps in "
                             "the schedule", best, attempts=attempts)
