"""Damped Newton/Broyden iteration inside a box trust region."""

from dataclasses import dataclass

import numpy as np


def fd_jacobian(F, x, step=1e-6):
    """Central finite-difference Jacobian."""
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(len(x)):
        e = np.zeros_like(x)
        e[j] = step
        cols.append((np.asarray(F(x + e)) - np.asarray(F(x - e))) / (2 * step))
    return np.column_stack(cols)


@dataclass
class NewtonResult:
    x: np.ndarray
    value: np.ndarray
    converged: bool
    iterations: int
    jacobian: np.ndarray
    reason: str = ""

    @property
    def residual(self):
        return float(np.max(np.abs(self.value)))


def newton_box(F, x0, J0, radius, target, max_iter=40, refresh=5,
               fd_step=1e-6):
    """Drive ``F`` to zero starting from ``x0`` with ``|x|_inf`` kept below
    ``0.9 * radius``.

    The Jacobian starts at ``J0``, is updated by Broyden's rule after every
    accepted step and recomputed by central differences every ``refresh``
    iterations or whenever a line search fails.  Returns when
    ``max |F| < target``, when the iteration stalls, or when it would have to
    leave the box.
    """
    limit = 0.9 * radius
    x = np.asarray(x0, dtype=float).copy()
    Fx = np.asarray(F(x), dtype=float)
    J = np.asarray(J0, dtype=float).copy()
    fresh = False
    for it in range(max_iter):
        if np.max(np.abs(Fx)) < target:
            return NewtonResult(x, Fx, True, it, J)
        try:
            dx = np.linalg.solve(J, -Fx)
        except np.linalg.LinAlgError:
            dx = np.linalg.lstsq(J, -Fx, rcond=None)[0]
        t = 1.0
        peak = np.max(np.abs(x + dx))
        clipped = False
        if peak > limit:
            # largest t keeping every coordinate inside the box
            with np.errstate(divide="ignore", invalid="ignore"):
                room = np.where(dx > 0, (limit - x) / dx,
                                np.where(dx < 0, (-limit - x) / dx, np.inf))
            t = float(max(0.0, min(1.0, room.min())))
            clipped = True
        f0 = np.linalg.norm(Fx)
        accepted = False
        while t > 1e-4:
            xn = x + t * dx
            Fn = np.asarray(F(xn), dtype=float)
            if np.linalg.norm(Fn) < (1 - 1e-4 * t) * f0:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            if not fresh:
                J = fd_jacobian(F, x, fd_step)
                fresh = True
                continue
            reason = "left trust region" if clipped else "stalled"
            return NewtonResult(x, Fx, False, it, J, reason)
        s = xn - x
        y = Fn - Fx
        J = J + np.outer(y - J @ s, s) / np.dot(s, s)
        x, Fx = xn, Fn
        fresh = False
        if (it + 1) % refresh == 0:
            J = fd_jacobian(F, x, fd_step)
            fresh = True
    converged = bool(np.max(np.abs(Fx)) < target)
    return NewtonResult(x, Fx, converged, max_iter, J,
                        "" if converged else "iteration limit")
