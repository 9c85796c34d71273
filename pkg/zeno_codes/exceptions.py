class ZenoCodeError(Exception):
    """Base exception for code search, control synthesis and simulation errors."""
    pass

class InvalidParameterError(ZenoCodeError, ValueError):
    """Raised when an argument violates a documented precondition."""
    pass

class NotHermitianError(ZenoCodeError, ValueError):
    """Raised when a matrix that must be Hermitian is not."""
    pass

class DimensionMismatchError(ZenoCodeError, ValueError):
    """Raised when operands do not share compatible dimensions."""
    pass

class CapExceededError(ZenoCodeError):
    """Raised when a Hilbert-space dimension exceeds the configured limit."""
    pass

class ZeroDetuningError(ZenoCodeError, ValueError):
    """Raised when the Raman detuning is zero."""
    pass

class IndexOutOfRangeError(ZenoCodeError, IndexError):
    """Raised when a timing slot index is outside 1..M'."""
    pass

class ZeroNormStateError(ZenoCodeError):
    """Raised when postselection on the ancilla reference state has vanishing probability."""
    pass

class NotDensityMatrixError(ZenoCodeError, ValueError):
    """Raised when a matrix is not a unit-trace Hermitian density matrix."""
    pass

class FormatError(ZenoCodeError):
    """Raised when an artifact file cannot be parsed."""
    pass

class NotConvergedError(ZenoCodeError):
    """Raised when an iterative search stops at max_iter above tolerance.

    The best iterate found is attached as ``best`` so callers can still
    persist it.
    """

    def __init__(self, iterations: int, residual: float, best=None):
        super().__init__(
            f"Not converged after {iterations} iterations (residual {residual:.3e})"
        )
        self.iterations = iterations
        self.residual = residual
        self.best = best
