"""Exception hierarchy.

Precondition errors derive from :class:`PreconditionError` (a ``ValueError``);
the command line maps them to exit code 2. :class:`ConvergenceFailure` maps
to exit code 3.
"""


class SturmkitError(Exception):
    """Base class for all errors raised by this package."""


class PreconditionError(SturmkitError, ValueError):
    """Input violates the precondition of an operation."""


class ParseError(PreconditionError):
    def __init__(self, position, message):
        self.position = position
        self.message = message
        super().__init__(f"{message} (at offset {position})")


class DomainError(PreconditionError):
    pass


class PeriodMismatch(PreconditionError):
    def __init__(self, p1, p2):
        self.periods = (p1, p2)
        super().__init__(f"period mismatch: {p1!r} vs {p2!r}")


class AllNeutral(PreconditionError):
    pass


class InsufficientSignChanges(PreconditionError):
    def __init__(self, found, needed):
        self.found = found
        self.needed = needed
        super().__init__(
            f"needs at least {needed} sign changes, found {found}")


class NoStableNeighborhood(PreconditionError):
    pass


class TrustRegionExceeded(PreconditionError):
    pass


class SingularMatrix(PreconditionError):
    pass


class NotOrthogonal(PreconditionError):
    def __init__(self, residuals):
        self.residuals = residuals
        super().__init__(
            "function is not L2-orthogonal to the system "
            f"(max residual {max(abs(r) for r in residuals):.3e})")


class NotChebyshev(PreconditionError):
    pass


class DependentBasis(PreconditionError):
    pass


class NonPositiveK(PreconditionError):
    pass


class BracketFailure(PreconditionError):
    pass


class DegenerateJacobian(PreconditionError):
    pass


class CurveNotClosed(PreconditionError):
    pass


class OriginHit(PreconditionError):
    pass


class DerivativeUnderflow(PreconditionError):
    pass


class ConvergenceFailure(SturmkitError):
    def __init__(self, message, best_residual=float("nan"), **diagnostics):
        self.best_residual = best_residual
        self.diagnostics = diagnostics
        super().__init__(f"{message} (best residual {best_residual:.3e})")
