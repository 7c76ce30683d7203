"""Step functions with values ±1: sphere parametrization, Hobby-Rice
moment map and its zeros, canonical forms.

A point ``x`` of the unit sphere in R^{n+1} encodes the partition of
``[0, L]`` into consecutive intervals of lengths ``x_i^2 L`` with value
``sign(x_i)`` on interval ``i``.  The induced moment map

    x -> (integral of h_x * g_j, j = 1..n)

is odd, so by Borsuk-Ulam it has a zero; :func:`solve_hobby_rice` finds one
by Newton's method on the sphere.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.stats import norm, qmc

from .chebyshev import verify_chebyshev
from .errors import ConvergenceFailure, DependentBasis, NotChebyshev
from .fncore import DEFAULT_RULE, CircleFunction, write_csv


class StepFunction:
    """Piecewise constant function on ``[0, L)`` with values in {-1, 0, 1}.

    Parameters
    ----------
    edges : array_like
        ``0 = e_0 <= e_1 <= ... <= e_K = L``.
    signs : array_like
        Value on ``[e_k, e_{k+1})``, one per interval.
    """

    def __init__(self, edges, signs, canonical=False):
        edges = np.asarray(edges, dtype=float).ravel()
        signs = np.asarray(signs, dtype=float).ravel()
        if len(edges) != len(signs) + 1:
            raise ValueError("need one sign per interval")
        if np.any(np.diff(edges) < 0) or edges[0] != 0.0:
            raise ValueError("edges must start at 0 and be nondecreasing")
        self.edges = edges
        self.signs = signs
        self.canonical = canonical

    @classmethod
    def from_lengths(cls, lengths, signs, canonical=False):
        lengths = np.asarray(lengths, dtype=float)
        return cls(np.concatenate([[0.0], np.cumsum(lengths)]), signs,
                   canonical)

    @property
    def length(self):
        return float(self.edges[-1])

    @property
    def lengths(self):
        return np.diff(self.edges)

    @property
    def breakpoints(self):
        """Interior edges."""
        return self.edges[1:-1].copy()

    @property
    def n_intervals(self):
        return len(self.signs)

    def __call__(self, x):
        x = np.mod(np.asarray(x, dtype=float), self.length)
        k = np.searchsorted(self.edges, x, side="right") - 1
        k = np.clip(k, 0, len(self.signs) - 1)
        out = self.signs[k]
        return float(out) if out.ndim == 0 else out

    def __neg__(self):
        return StepFunction(self.edges, -self.signs, self.canonical)

    def as_circle_function(self):
        return CircleFunction(self.__call__, self.length, self.edges[:-1],
                              label=f"step[{self.n_intervals}]")

    def l1_distance(self, other):
        """Exact L1 distance between two step functions on the same domain."""
        if abs(self.length - other.length) > 1e-12 * self.length:
            raise ValueError("domains differ")
        e = np.unique(np.concatenate([self.edges, other.edges]))
        mid = 0.5 * (e[1:] + e[:-1])
        return float(np.sum(np.abs(self(mid) - other(mid)) * np.diff(e)))

    def to_json(self):
        return {"domain": [0.0, self.length],
                "breakpoints": [float(b) for b in self.breakpoints],
                "signs": [int(s) for s in self.signs]}

    def to_csv(self, path, n=1024):
        x = np.arange(n) * (self.length / n)
        write_csv(path, ("x", "value"), np.column_stack([x, self(x)]))

    def __repr__(self):
        return (f"StepFunction(breakpoints={np.round(self.breakpoints, 6)}, "
                f"signs={self.signs.astype(int)})")


@dataclass(frozen=True)
class SignedPartition:
    """Point of the unit sphere S^n encoding a signed partition of
    ``[0, length]``."""

    coords: tuple
    length: float = 1.0

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float).ravel()
        if abs(np.dot(c, c) - 1.0) >= 1e-12:
            raise ValueError("coordinates must lie on the unit sphere")
        object.__setattr__(self, "coords", tuple(float(t) for t in c))

    @classmethod
    def normalized(cls, coords, length=1.0):
        c = np.asarray(coords, dtype=float)
        return cls(tuple(c / np.linalg.norm(c)), length)

    def __neg__(self):
        return SignedPartition(tuple(-c for c in self.coords), self.length)

    @property
    def array(self):
        return np.asarray(self.coords)


def step_from_sphere(p):
    """Step function ``h_x``: lengths ``x_i^2 L``, value ``sign x_i``.

    Zero-length intervals are dropped.
    """
    x = p.array
    lengths = x * x * p.length
    keep = lengths > 0
    lengths = lengths[keep]
    lengths[np.argmax(lengths)] += p.length - lengths.sum()
    return StepFunction.from_lengths(lengths, np.sign(x[keep]))


def canonicalize(h, min_length=0.0):
    """Drop intervals of length ``<= min_length`` and zero sign, then merge
    neighbours of equal sign."""
    lengths = h.lengths
    keep = (lengths > min_length) & (h.signs != 0)
    lengths = lengths[keep]
    signs = h.signs[keep]
    if len(signs) == 0:
        raise ValueError("step function has no intervals of nonzero sign")
    merged_l = [lengths[0]]
    merged_s = [signs[0]]
    for ln, s in zip(lengths[1:], signs[1:]):
        if s == merged_s[-1]:
            merged_l[-1] += ln
        else:
            merged_l.append(ln)
            merged_s.append(s)
    edges = np.concatenate([[0.0], np.cumsum(merged_l)])
    edges[-1] = h.length
    return StepFunction(edges, merged_s, canonical=True)


def cell_step(simplex_point, first_sign, length=1.0):
    """Cell map of the step-function sphere: lengths ``simplex_point *
    length``, alternating signs starting with ``first_sign``.

    Boundary faces are not canonicalized; apply :func:`canonicalize`.
    """
    x = np.asarray(simplex_point, dtype=float)
    signs = first_sign * (-1.0) ** np.arange(len(x))
    return StepFunction.from_lengths(x * length, signs)


def cell_of(h):
    """``(dimension, first sign)`` of the open cell containing ``h``."""
    c = canonicalize(h)
    return c.n_intervals - 1, int(c.signs[0])


def _as_matrix_fn(V):
    V = list(V)

    def evaluate(t):
        return np.array([np.broadcast_to(np.asarray(g(t), dtype=float),
                                         np.shape(t)) for g in V])

    return evaluate


def _domain_kinks(V):
    ks = [np.asarray(getattr(g, "kinks", ()), dtype=float) for g in V]
    return np.concatenate(ks) if ks else np.empty(0)


def moment_map(p, V, rule=DEFAULT_RULE):
    """``(integral_0^L h_p g_j)_j`` with quadrature split exactly at the
    interval boundaries."""
    x = p.array if isinstance(p, SignedPartition) else np.asarray(p, float)
    L = p.length if isinstance(p, SignedPartition) else 1.0
    return _moments(x, _as_matrix_fn(V), L, rule, _domain_kinks(V))


def _moments(x, G, L, rule, extra_kinks=()):
    lengths = x * x * L
    edges = np.concatenate([[0.0], np.cumsum(lengths)])
    signs = np.sign(x)
    kinks = np.concatenate([edges, np.mod(extra_kinks, L)])

    def integrand(t):
        k = np.clip(np.searchsorted(edges, t, side="right") - 1, 0,
                    len(signs) - 1)
        return G(t) * signs[k]

    return np.atleast_1d(rule.integrate(integrand, 0.0, edges[-1], kinks))


def _moment_jacobian(x, G, L):
    """Derivative of the moments with respect to the sphere coordinates
    (before tangential projection)."""
    lengths = x * x * L
    edges = np.concatenate([[0.0], np.cumsum(lengths)])
    s = np.sign(x)
    Ge = G(edges)
    n1 = len(x)
    # d/dl_r: s_r g(B_{r+1}) + sum_{i>r} s_i (g(B_{i+1}) - g(B_i))
    diffs = s[None, :] * (Ge[:, 1:] - Ge[:, :-1])
    tail = np.cumsum(diffs[:, ::-1], axis=1)[:, ::-1]
    dl = np.empty((Ge.shape[0], n1))
    for r in range(n1):
        dl[:, r] = s[r] * Ge[:, r + 1] + (tail[:, r + 1] if r + 1 < n1 else 0.0)
    return dl * (2.0 * L * x)[None, :]


@dataclass
class HobbyRiceResult:
    partition: SignedPartition
    step: StepFunction
    residual: float
    seed_index: int
    iterations: int


def _gram_check(G, L, rule, kinks):
    gram = rule.integrate(lambda t: (lambda B: B[:, None] * B[None])(G(t)),
                          0.0, L, kinks)
    gram = np.atleast_2d(gram)
    d = np.sqrt(np.diag(gram))
    if np.any(d <= 0):
        raise DependentBasis("basis contains a zero function")
    lam = np.linalg.eigvalsh(gram / np.outer(d, d))
    if lam.min() <= 1e-10:
        raise DependentBasis(
            f"basis is linearly dependent (Gram eigenvalue {lam.min():.2e})")


def sphere_seeds(dim, count, offset=0):
    """Deterministic starting points on S^{dim-1}: the equal-length
    alternating partition, then scrambled-free Halton points pushed to the
    sphere.  Every seed is followed by its antipode."""
    pts = []
    base = (-1.0) ** np.arange(dim) / np.sqrt(dim)
    if offset == 0:
        pts.append(base)
    need = count - len(pts)
    if need > 0:
        halton = qmc.Halton(d=dim, scramble=False)
        halton.fast_forward(1 + offset)
        u = halton.random(need)
        u = np.clip(u, 1e-6, 1 - 1e-6)
        z = norm.ppf(u)
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        pts.extend(z)
    out = []
    for p in pts[:count]:
        out.append(p)
        out.append(-p)
    return out


def _newton_sphere(x, G, L, rule, kinks, tol, max_iter):
    F = _moments(x, G, L, rule, kinks)
    for it in range(max_iter):
        r = np.max(np.abs(F))
        if r < tol:
            return x, F, it
        J = _moment_jacobian(x, G, L)
        P = np.eye(len(x)) - np.outer(x, x)
        d = -np.linalg.pinv(J @ P, rcond=1e-12) @ F
        f0 = np.linalg.norm(F)
        t = 1.0
        while t > 1e-6:
            y = x + t * d
            y /= np.linalg.norm(y)
            Fy = _moments(y, G, L, rule, kinks)
            if np.linalg.norm(Fy) < (1 - 1e-4 * t) * f0:
                break
            t *= 0.5
        else:
            return x, F, it
        x, F = y, Fy
    return x, F, max_iter


def _alternating_charts(x, delta=1e-4, limit=12):
    """Re-embed the step function of ``x`` in sphere charts with strictly
    alternating signs.

    When neighbouring coordinates share a sign, their breakpoint has no
    effect and Newton can stall on the lower-dimensional stratum.  The
    merged intervals are placed in alternating slots and the unused slots
    get length ``delta``, which restores a full-rank Jacobian.
    """
    n1 = len(x)
    lengths = x * x
    merged_l, merged_s = [], []
    for ln, sg in zip(lengths, np.sign(x)):
        if ln <= 1e-14 or sg == 0:
            continue
        if merged_s and merged_s[-1] == sg:
            merged_l[-1] += ln
        else:
            merged_l.append(ln)
            merged_s.append(sg)
    k = len(merged_s)
    if k >= n1:
        return []
    out = []
    for first in (1.0, -1.0):
        slot_sign = first * (-1.0) ** np.arange(n1)
        for slots in combinations(range(n1), k):
            if any(slot_sign[i] != sg for i, sg in zip(slots, merged_s)):
                continue
            new = np.full(n1, delta)
            new[list(slots)] = np.asarray(merged_l) * (1 - (n1 - k) * delta)
            out.append(slot_sign * np.sqrt(new / new.sum()))
            if len(out) == limit:
                return out
    return out


def solve_hobby_rice(V, seeds=8, length=None, rule=DEFAULT_RULE, tol=1e-9,
                     max_iter=60, seed_offset=0):
    """Find a ±1 step function with at most ``n + 1`` intervals orthogonal to
    the ``n`` functions ``V`` on ``[0, length]``.

    Newton iterations on the sphere (tangential pseudo-inverse steps,
    renormalization, step halving) are run from ``seeds`` antipodal pairs of
    deterministic starts; the first start (in seed order) that converges
    wins.  A start that stalls where two neighbouring intervals share a sign
    is restarted from alternating re-embeddings of its final step function.

    Raises
    ------
    DependentBasis
        The functions are linearly dependent.
    ConvergenceFailure
        No start converged; carries the best residual reached.
    """
    V = list(V)
    if length is None:
        length = float(getattr(V[0], "period", 1.0))
    G = _as_matrix_fn(V)
    kinks = _domain_kinks(V)
    _gram_check(G, length, rule, np.mod(kinks, length))
    best = np.inf
    n1 = len(V) + 1
    target = min(tol, 1e-12)
    for i, x0 in enumerate(sphere_seeds(n1, seeds, seed_offset)):
        x, F, it = _newton_sphere(np.array(x0, dtype=float), G, length, rule,
                                  kinks, target, max_iter)
        r = float(np.max(np.abs(F)))
        starts = [] if r < tol else _alternating_charts(x)
        for y0 in starts:
            y, Fy, more = _newton_sphere(y0, G, length, rule, kinks, target,
                                         max_iter)
            if float(np.max(np.abs(Fy))) < r:
                x, F, r = y, Fy, float(np.max(np.abs(Fy)))
                it += more
            if r < tol:
                break
        best = min(best, r)
        if r < tol:
            p = SignedPartition.normalized(x, length)
            return HobbyRiceResult(p, step_from_sphere(p), r,
                                   i + 2 * seed_offset, it)
    raise ConvergenceFailure("Hobby-Rice Newton iteration did not converge "
                             "from any seed", best)


def orth_alternating_step(V, seeds=8, attempts=4, trials=200):
    """Alternating ±1 step function with exactly ``n + 1`` intervals that is
    orthogonal to the Chebyshev system ``V``.

    Raises
    ------
    NotChebyshev
        ``V`` fails :func:`verify_chebyshev` with ``trials`` trials.
    ConvergenceFailure
    """
    report = verify_chebyshev(V, trials)
    if not report.passed:
        raise NotChebyshev(
            f"system is not Chebyshev: a combination has {report.worst_count}"
            f" sign changes > n - 1 = {V.dimension - 1}")
    n = V.dimension
    best = np.inf
    for a in range(attempts):
        try:
            res = solve_hobby_rice(V.basis, seeds, V.period, V.rule,
                                   seed_offset=a * seeds)
        except ConvergenceFailure as exc:
            best = min(best, exc.best_residual)
            continue
        h = canonicalize(res.step, min_length=1e-12 * V.period)
        best = min(best, res.residual)
        if h.n_intervals == n + 1:
            h.residual = res.residual
            return h
    raise ConvergenceFailure(
        f"no orthogonal step with exactly {n + 1} intervals found", best)
