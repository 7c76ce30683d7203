"""Periodic real functions on a circle of given period."""

import csv
import math

import numpy as np
import sympy
from scipy.interpolate import PchipInterpolator

from ..errors import DomainError, PeriodMismatch
from .expression import X, parse_to_sympy
from .quadrature import DEFAULT_RULE

TWO_PI = 2.0 * math.pi

PROBE_POINTS = 4096


def _same_period(p, q):
    return abs(p - q) <= 1e-12 * max(abs(p), abs(q))


def check_periods(*funcs):
    """Raise :class:`PeriodMismatch` unless all functions share a period."""
    p0 = funcs[0].period
    for f in funcs[1:]:
        if not _same_period(p0, f.period):
            raise PeriodMismatch(p0, f.period)
    return p0


class CircleFunction:
    """A real function on the circle R / (period Z).

    Evaluation always reduces its argument modulo ``period`` before calling
    the wrapped body, so periodicity holds by construction.

    Parameters
    ----------
    func : callable
        Vectorized body, called with abscissae already reduced to
        ``[0, period)``.
    period : float
    kinks : sequence of float, optional
        Points where the body is not smooth (jumps, derivative breaks).
        Quadrature and sign scanning split there.  ``0`` is always added.
    derivatives : sequence of callable, optional
        Bodies of the first, second, ... derivatives.
    expr : sympy expression, optional
        Symbolic body, when the function came from an expression.
    """

    def __init__(self, func, period, kinks=(), derivatives=(), expr=None,
                 label=None):
        period = float(period)
        if not period > 0:
            raise ValueError("period must be positive")
        self.period = period
        self._func = func
        k = np.mod(np.asarray(kinks, dtype=float).ravel(), period)
        k[np.abs(k - period) < 1e-14 * period] = 0.0
        self.kinks = np.unique(np.concatenate([[0.0], k]))
        self._derivs = tuple(derivatives)
        self.expr = expr
        self.label = label

    # -- evaluation ---------------------------------------------------------

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        r = np.mod(x, self.period)
        out = np.asarray(self._func(r), dtype=float)
        if out.shape != r.shape:
            out = np.broadcast_to(out, r.shape).copy()
        return float(out) if out.ndim == 0 else out

    @property
    def max_derivative_order(self):
        return len(self._derivs)

    def derivative(self, order=1):
        """The ``order``-th derivative as a CircleFunction."""
        if order == 0:
            return self
        if order > len(self._derivs):
            raise ValueError(
                f"derivative of order {order} unavailable for {self!r}")
        higher = self._derivs[order:]
        return CircleFunction(self._derivs[order - 1], self.period, self.kinks,
                              higher)

    def sample(self, n=1024):
        x = np.arange(n) * (self.period / n)
        return x, self(x)

    def to_csv(self, path, n=1024):
        x, v = self.sample(n)
        write_csv(path, ("x", "value"), np.column_stack([x, v]))

    def __repr__(self):
        body = self.label or (str(self.expr) if self.expr is not None else "...")
        return f"CircleFunction({body}, period={self.period:.17g})"

    # -- arithmetic ---------------------------------------------------------

    def _binary(self, other, op, symbol):
        if isinstance(other, CircleFunction):
            check_periods(self, other)
            f, g = self._func, other._func
            expr = None
            if self.expr is not None and other.expr is not None:
                expr = op(self.expr, other.expr)
            if expr is not None:
                return _from_sympy(expr, self.period,
                                   np.concatenate([self.kinks, other.kinks]))
            return CircleFunction(lambda x: op(f(x), g(x)), self.period,
                                  np.concatenate([self.kinks, other.kinks]))
        c = float(other)
        if self.expr is not None:
            return _from_sympy(op(self.expr, sympy.Rational(c)), self.period,
                               self.kinks)
        f = self._func
        derivs = ()
        if symbol in "+-":
            derivs = self._derivs
        elif symbol in "*/":
            derivs = tuple((lambda d: (lambda x: op(d(x), c)))(d)
                           for d in self._derivs)
        return CircleFunction(lambda x: op(f(x), c), self.period, self.kinks,
                              derivs)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b, "+")

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b, "-")

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, CircleFunction):
            return self._binary(other, lambda a, b: a * b, "x")
        return self._binary(other, lambda a, b: a * b, "*")

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(float(other), lambda a, b: a / b, "/")

    def __neg__(self):
        return self * -1.0


def _from_sympy(expr, period, kinks=()):
    body = sympy.lambdify(X, expr, "numpy")
    cache = {}

    def deriv(order):
        if order not in cache:
            # derivatives of abs() produce point masses; they vanish off a
            # null set and are dropped
            d = sympy.diff(expr, X, order).replace(sympy.DiracDelta,
                                                    lambda *a: 0)
            cache[order] = sympy.lambdify(X, d, "numpy")
        return cache[order]

    def make(order):
        def d(x):
            x = np.asarray(x, dtype=float)
            return np.broadcast_to(np.asarray(deriv(order)(x), dtype=float),
                                   x.shape).copy()
        return d

    derivs = tuple(make(o) for o in (1, 2, 3))
    return CircleFunction(body, period, kinks, derivs, expr=expr)


def parse_expression(text, period=TWO_PI):
    """Parse ``text`` into a CircleFunction of the given period.

    Symbolic derivatives up to order 3 are attached.

    Raises
    ------
    ParseError
        Malformed input.
    DomainError
        The expression is not finite somewhere on a 4096-point probe grid.
    """
    expr = parse_to_sympy(text)
    f = _from_sympy(expr, period)
    f.label = text
    x = np.arange(PROBE_POINTS) * (f.period / PROBE_POINTS)
    with np.errstate(all="ignore"):
        v = f(x)
    bad = ~np.isfinite(v)
    if bad.any():
        raise DomainError(
            f"expression {text!r} is not finite at x={x[bad][0]:.17g}")
    return f


def constant(value, period=TWO_PI):
    value = float(value)
    return CircleFunction(lambda x: np.full_like(x, value), period,
                          derivatives=(lambda x: np.zeros_like(x),) * 3,
                          expr=sympy.Rational(value), label=repr(value))


def from_callable(func, period, kinks=(), label=None):
    """Wrap a vectorized callable (no derivative information)."""
    return CircleFunction(func, period, kinks, label=label)


def from_samples(x, values, period):
    """Periodic monotone-cubic (PCHIP) interpolant through samples.

    ``x`` must be strictly increasing in ``[0, period)`` with at least 16
    nodes.  Monotone cubics do not overshoot, so no sign changes are created
    between samples of equal sign.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(values, dtype=float)
    if x.ndim != 1 or x.shape != v.shape:
        raise ValueError("x and values must be 1-d arrays of equal length")
    if len(x) < 16:
        raise ValueError("sampled functions need at least 16 nodes")
    if np.any(np.diff(x) <= 0) or x[0] < 0 or x[-1] >= period:
        raise ValueError("x must be strictly increasing in [0, period)")
    w = 3
    xe = np.concatenate([x[-w:] - period, x, x[:w] + period])
    ve = np.concatenate([v[-w:], v, v[:w]])
    interp = PchipInterpolator(xe, ve, extrapolate=True)
    d1 = interp.derivative(1)
    d2 = interp.derivative(2)
    d3 = interp.derivative(3)
    return CircleFunction(interp, period, kinks=x, derivatives=(d1, d2, d3),
                          label=f"samples[{len(x)}]")


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    try:
        data = np.array([[float(c) for c in r] for r in rows[1:] if r])
    except ValueError as exc:
        raise ValueError(f"{path}: header row required and data must be "
                         "numeric") from exc
    return header, data


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in np.atleast_2d(rows):
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def load_csv(path, period):
    """Load a sampled function from a two-column ``x,value`` CSV file."""
    header, data = read_csv(path)
    if header != ["x", "value"]:
        raise ValueError(f"{path}: expected header 'x,value', got {header}")
    return from_samples(data[:, 0], data[:, 1], period)


def inner_product(f, g, rule=DEFAULT_RULE):
    """L2 inner product of two functions over one period."""
    period = check_periods(f, g)
    kinks = np.concatenate([f.kinks, g.kinks])
    return rule.integrate(lambda x: f(x) * g(x), 0.0, period, kinks)
