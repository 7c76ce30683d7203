"""Chebyshev systems on the circle."""

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import NotOrthogonal, PreconditionError, SingularMatrix
from .fncore import (
    DEFAULT_RULE,
    TWO_PI,
    check_periods,
    constant,
    count_sign_changes,
    parse_expression,
    probe_grid,
)

CONDITION_LIMIT = 1e12


class ChebyshevSystem:
    """Ordered basis ``g_1, ..., g_n`` of circle functions.

    The dimension must be odd (a Chebyshev system on the circle has odd
    dimension) and the Gram matrix must be numerically positive definite.
    Whether the span really is a Chebyshev system is checked separately by
    :func:`verify_chebyshev`.
    """

    def __init__(self, basis, rule=DEFAULT_RULE, name=None):
        basis = tuple(basis)
        if not basis:
            raise ValueError("empty basis")
        if len(basis) % 2 == 0:
            raise ValueError("a Chebyshev system on the circle has odd "
                             f"dimension, got {len(basis)}")
        self.period = check_periods(*basis)
        self.basis = basis
        self.rule = rule
        self.name = name
        gram = self.gram()
        d = np.sqrt(np.diag(gram))
        if np.any(d <= 0):
            raise PreconditionError("basis contains a zero function")
        normalized = gram / np.outer(d, d)
        lam = np.linalg.eigvalsh(normalized)
        if lam.min() <= 1e-10:
            raise PreconditionError(
                f"basis is linearly dependent (Gram eigenvalue {lam.min():.2e})")

    @property
    def dimension(self):
        return len(self.basis)

    @property
    def kinks(self):
        return np.unique(np.concatenate([g.kinks for g in self.basis]))

    def evaluate(self, x):
        """Matrix of shape ``(n, len(x))`` with rows ``g_i(x)``."""
        x = np.asarray(x, dtype=float)
        return np.array([g(x) for g in self.basis]).reshape(
            (self.dimension,) + x.shape)

    def gram(self):
        G = self.rule.integrate(
            lambda x: (lambda B: B[:, None, :] * B[None, :, :])(self.evaluate(x)),
            0.0, self.period, self.kinks)
        return 0.5 * (G + G.T)

    def __repr__(self):
        return f"ChebyshevSystem({self.name or self.dimension})"


def trig_system(order, rule=DEFAULT_RULE):
    """``{1, cos x, sin x, ..., cos kx, sin kx}`` on period 2 pi."""
    if order < 0:
        raise ValueError("order must be >= 0")
    basis = [constant(1.0)]
    for m in range(1, order + 1):
        basis.append(parse_expression(f"cos({m}*x)"))
        basis.append(parse_expression(f"sin({m}*x)"))
    return ChebyshevSystem(basis, rule, name=f"trig:{order}")


def system_from_spec(spec, rule=DEFAULT_RULE):
    """Build a system from ``{"type": "trig", "order": k}`` or
    ``{"type": "custom", "basis": [expr, ...], "period": p}``."""
    kind = spec.get("type")
    if kind == "trig":
        return trig_system(int(spec["order"]), rule)
    if kind == "custom":
        period = float(spec.get("period", TWO_PI))
        basis = [parse_expression(e, period) for e in spec["basis"]]
        return ChebyshevSystem(basis, rule, name="custom")
    raise ValueError(f"unknown system type {kind!r}")


def load_system(path, rule=DEFAULT_RULE):
    with open(path) as fh:
        spec = json.load(fh)
    spec.setdefault("type", "custom")
    return system_from_spec(spec, rule)


@dataclass(frozen=True)
class Collocation:
    """Collocation matrix ``M[i, j] = g_i(x_j)`` with its LU factors."""

    matrix: np.ndarray
    lu: tuple
    condition: float

    def solve(self, rhs):
        return scipy.linalg.lu_solve(self.lu, rhs)


def collocation_matrix(V, points):
    """Matrix ``g_i(x_j)``; nonsingular at distinct points for a genuine
    Chebyshev system.

    Raises
    ------
    SingularMatrix
        If the condition number exceeds 1e12.
    """
    points = np.asarray(points, dtype=float).ravel()
    if len(points) != V.dimension:
        raise ValueError(f"need {V.dimension} points, got {len(points)}")
    M = V.evaluate(points)
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularMatrix(
            f"collocation matrix is singular (condition {cond:.3e})")
    return Collocation(M, scipy.linalg.lu_factor(M), float(cond))


def residual_vector(f, V, rule=None):
    """``(<f, g_1>, ..., <f, g_n>)``."""
    rule = rule or V.rule
    check_periods(f, *V.basis)
    kinks = np.concatenate([f.kinks, V.kinks])
    return np.asarray(rule.integrate(lambda x: V.evaluate(x) * f(x), 0.0,
                                     V.period, kinks))


@dataclass
class ChebyshevReport:
    passed: bool
    worst_coefficients: np.ndarray
    worst_count: int
    counts: np.ndarray = field(repr=False)
    trials: int = 0


def _cyclic_sign_changes(values, tol):
    """Sign changes around the circle of each row of ``values``, ignoring
    entries with ``|v| <= tol`` (per-row tolerance)."""
    out = np.empty(len(values), dtype=int)
    for r, row in enumerate(values):
        s = np.sign(row[np.abs(row) > tol[r]])
        out[r] = 0 if len(s) == 0 else int(np.count_nonzero(s != np.roll(s, -1)))
    return out


def verify_chebyshev(V, trials=500, seed=0, n_grid=4096):
    """Randomized falsifier for the Chebyshev property.

    Draws ``trials`` random unit coefficient vectors and counts the sign
    changes of each combination.  Passes iff no count exceeds ``n - 1``.
    Zeros without a sign change are invisible, so this can refute but never
    prove the property.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    C = rng.standard_normal((trials, V.dimension))
    C /= np.linalg.norm(C, axis=1, keepdims=True)
    grid = probe_grid(V.basis[0], n_grid)
    grid = np.unique(np.concatenate([grid, V.kinks]))
    values = C @ V.evaluate(grid)
    tol = 1e-9 * np.max(np.abs(values), axis=1)
    counts = _cyclic_sign_changes(values, tol)
    worst = int(np.argmax(counts))
    return ChebyshevReport(bool(counts.max() <= V.dimension - 1), C[worst],
                           int(counts[worst]), counts, trials)


@dataclass
class SturmHurwitzReport:
    passed: bool
    count: int
    needed: int
    locations: np.ndarray
    residuals: np.ndarray


def sturm_hurwitz_check(f, V, rule=None, orth_tol=1e-8):
    """Check the forward theorem: ``f`` orthogonal to ``V`` has at least
    ``n + 1`` sign changes.

    Raises
    ------
    NotOrthogonal
        If some ``|<f, g_i>|`` is not below ``orth_tol``.
    """
    res = residual_vector(f, V, rule)
    if np.max(np.abs(res)) >= orth_tol:
        raise NotOrthogonal(res)
    x, v = f.sample(4096)
    rep = count_sign_changes(f, 1e-9 * float(np.max(np.abs(v))))
    needed = V.dimension + 1
    return SturmHurwitzReport(rep.count >= needed, rep.count, needed,
                              rep.locations, res)
