"""Converse Sturm-Hurwitz-Kellogg solver.

Given a Chebyshev system ``V`` of dimension ``n`` and a function ``f`` with
at least ``n + 1`` sign changes, find an orientation-preserving circle
diffeomorphism ``phi`` with ``f o phi`` orthogonal to ``V``:

1. ``h`` <- alternating ±1 step with ``n + 1`` intervals orthogonal to ``V``.
2. ``phi0`` stretches neighbourhoods of ``n + 1`` alternation points of
   ``f`` so that ``f o phi0`` is close to ``h`` in measure.
3. ``psi_alpha`` moves the breakpoints of ``h`` by ``alpha``; transporting a
   function by ``psi_alpha`` moves its jumps the same way, and the residual
   map has the nonsingular Jacobian ``2 (-1)^(j+1) g_i(x_j)`` at ``h``.
4. Newton on ``alpha`` zeroes the residuals of ``f o phi0`` transported by
   ``psi_alpha``; then ``phi = phi0 o psi_alpha^{-1}``.
"""

from dataclasses import dataclass, field

import numpy as np

from ._newton import fd_jacobian, newton_box
from .chebyshev import collocation_matrix, residual_vector
from .diffeo import (
    AlphaFamily,
    build_stretch_to_step,
    compose,
    invert,
    psi_alpha,
    pullback,
)
from .errors import ConvergenceFailure, InsufficientSignChanges, TrustRegionExceeded
from .fncore import check_periods, count_sign_changes, find_alternation_points
from .stepspace import orth_alternating_step


def jacobian_at_origin(V, breakpoints):
    """``C[i, j] = 2 (-1)^(j+1) g_i(x_j)`` (``j`` counted from 1).

    Assumes the step is ``+1`` on ``[0, x_1)``.

    Raises
    ------
    SingularMatrix
        Propagated from :func:`collocation_matrix`.
    """
    col = collocation_matrix(V, breakpoints)
    n = V.dimension
    signs = (-1.0) ** np.arange(n)  # (-1)^(j+1) for j = 1..n
    return 2.0 * col.matrix * signs[None, :]


def transported_residual(g0, V, psi, rule=None):
    """Residuals of ``g0`` transported by ``psi``, i.e. of
    ``g0 o psi^{-1}``, computed after the substitution ``x = psi(y)``:

        <g0 o psi^{-1}, g_i> = integral g0(y) g_i(psi(y)) psi'(y) dy.

    No inversion is needed, and the integrand is smooth between the kinks of
    ``g0`` and ``psi``.
    """
    rule = rule or V.rule
    kinks = np.concatenate([g0.kinks, psi.kinks, psi.inverse(V.kinks)])

    def integrand(y):
        return g0(y) * psi.derivative(y) * V.evaluate(psi(y))

    return np.asarray(rule.integrate(integrand, 0.0, V.period, kinks))


def alpha_map(g0, V, family, rule=None):
    """``alpha -> residual_vector(g0 transported by psi_alpha, V)``.

    Transport by ``psi_alpha`` moves a jump of ``g0`` at ``x_i`` to
    ``x_i + alpha_i``; at ``alpha = 0`` the value is
    ``residual_vector(g0, V)``.
    """
    check_periods(g0, *V.basis)

    def F(alpha):
        return transported_residual(g0, V, psi_alpha(family, alpha), rule)

    return F


@dataclass
class SHKProblem:
    f: object
    V: object
    eps_schedule: tuple = (1e-2, 1e-3, 1e-4)
    target: float = 1e-8

    def __post_init__(self):
        check_periods(self.f, *self.V.basis)
        eps = tuple(float(e) for e in self.eps_schedule)
        if not eps or any(e <= 0 for e in eps) or any(
                b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("eps schedule must be decreasing positive reals")
        self.eps_schedule = eps


@dataclass
class SHKSolution:
    phi: object
    alpha: np.ndarray
    residuals: np.ndarray
    iterations: int
    eps: float
    jacobian_condition: float
    scale: float
    step: object = field(repr=False)
    stretch: object = field(repr=False)
    boundary_degree: int = None
    attempts: list = field(default_factory=list, repr=False)

    @property
    def max_residual(self):
        return float(np.max(np.abs(self.residuals)))

    def to_json(self):
        return {
            "alpha": [float(a) for a in self.alpha],
            "residuals": [float(r) for r in self.residuals],
            "max_residual": self.max_residual,
            "eps": self.eps,
            "iterations": self.iterations,
            "jacobian_condition": self.jacobian_condition,
            "scale": self.scale,
            "boundary_degree": self.boundary_degree,
            "step": self.step.to_json(),
        }


def _boundary_degree(F, radius):
    """Degree of ``F`` on the boundary of ``[-r, r]`` (dimension one)."""
    a, b = float(F(np.array([-radius]))[0]), float(F(np.array([radius]))[0])
    return int((np.sign(b) - np.sign(a)) / 2)


def solve_converse_shk(problem, max_iter=40):
    """Find ``phi`` with ``f o phi`` orthogonal to ``V``.

    Returns an :class:`SHKSolution` whose ``residuals`` were recomputed for
    ``f o phi`` with a quadrature rule twice as fine as the solver's.

    Raises
    ------
    InsufficientSignChanges
        ``f`` has fewer than ``n + 1`` sign changes.
    ConvergenceFailure
        Every ``eps`` of the schedule failed.
    """
    f, V = problem.f, problem.V
    n = V.dimension
    count = count_sign_changes(f, 0.0).count
    if count < n + 1:
        raise InsufficientSignChanges(count, n + 1)

    h = orth_alternating_step(V)
    if h.signs[0] < 0:
        h = -h
    c, points = find_alternation_points(f, n + 1)
    fhat = f / c
    family = AlphaFamily(tuple(h.breakpoints), V.period)
    J0 = jacobian_at_origin(V, h.breakpoints)
    inner_target = 1e-3 * problem.target / c
    verify_rule = V.rule.refined()

    attempts = []
    best = np.inf
    for eps in problem.eps_schedule:
        band = min(0.1, 10.0 * eps)
        phi0 = build_stretch_to_step(fhat, points, h, eps, band=band)
        g0 = pullback(fhat, phi0)
        F = alpha_map(g0, V, family)
        try:
            res = newton_box(F, np.zeros(n), J0, family.delta, inner_target,
                             max_iter=max_iter)
        except TrustRegionExceeded as exc:
            attempts.append({"eps": eps, "reason": str(exc)})
            continue
        attempts.append({"eps": eps, "reason": res.reason,
                         "residual": res.residual * c,
                         "iterations": res.iterations})
        best = min(best, res.residual * c)
        if not res.converged:
            continue
        psi = psi_alpha(family, res.x)
        phi = compose(phi0, invert(psi))
        verified = residual_vector(pullback(f, phi), V, verify_rule)
        if np.max(np.abs(verified)) >= problem.target:
            attempts[-1]["reason"] = "verification failed"
            best = min(best, float(np.max(np.abs(verified))))
            continue
        J = fd_jacobian(F, res.x)
        degree = _boundary_degree(F, 0.9 * family.delta) if n == 1 else None
        return SHKSolution(
            phi=phi, alpha=res.x, residuals=verified,
            iterations=res.iterations, eps=eps,
            jacobian_condition=float(np.linalg.cond(J)), scale=c, step=h,
            stretch=phi0, boundary_degree=degree, attempts=attempts)
    raise ConvergenceFailure("converse SHK Newton iteration failed for every "
                             "eps in the schedule", best, attempts=attempts)
