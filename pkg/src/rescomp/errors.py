"""Exception types shared across the package."""


class RescompError(Exception):
    """Base class for all package errors."""


class ShapeMismatch(RescompError):
    """Operands live on incompatible subsystem shapes."""


class EmptyKeepSet(RescompError):
    """Partial trace asked to keep no subsystems."""


class InvalidPermutation(RescompError):
    """Permutation does not match the factor count of the shape."""


class InvalidRank(RescompError):
    """Requested rank exceeds the total dimension (or is < 1)."""


class SolverFailure(RescompError):
    """A convex subproblem could not be solved to tolerance."""


class NonConvergence(SolverFailure):
    """Iterative solver hit its iteration cap before reaching tolerance.

    Carries the best gap achieved so callers can decide whether the
    partial result is usable.
    """

    def __init__(self, message: str, gap: float | None = None, result=None):
        super().__init__(message)
        self.gap = gap
        # best MeasureResult (or similar) reached before the cap, if any
        self.result = result


class InfeasibleAtUpperBound(SolverFailure):
    """Robustness bisection found no feasible mixing weight at s = dim.

    Signals a free-set family without a full-rank reachable state
    (e.g. an adversarial polytope)."""


class DimensionCap(RescompError):
    """Requested copy count would exceed the supported total dimension."""


class TargetIsFree(RescompError):
    """Conversion target has (numerically) zero regularized resource."""


class ConfigError(RescompError):
    """Invalid experiment configuration."""
