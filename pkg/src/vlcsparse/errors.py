"""Exception taxonomy shared by the whole package."""


class VlcsparseError(Exception):
    """Base class for all package errors."""


class ParameterError(VlcsparseError, ValueError):
    """Invalid parameter value or invalid instance/generator specification."""


class DimensionError(VlcsparseError, ValueError):
    """Shape mismatch between problem data and a supplied vector."""


class PreconditionError(VlcsparseError, ValueError):
    """A documented precondition of an operation is violated."""


class InfeasibleError(VlcsparseError, RuntimeError):
    """The constraint polyhedron (or relaxed set) appears to be empty."""


class NonconvergenceError(VlcsparseError, RuntimeError):
    """Iteration limit reached before the requested tolerance.

    Carries the best iterate found so far in ``best`` (solver dependent).
    """

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class SafeguardError(VlcsparseError, RuntimeError):
    """The augmented Lagrangian upper-bound safeguard failed persistently."""


class GenerationError(VlcsparseError, RuntimeError):
    """Random instance construction failed after bounded resampling."""
