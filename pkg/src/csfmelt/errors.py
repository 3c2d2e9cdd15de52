"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Raised for non-finite, out-of-range or otherwise unusable arguments."""


class SaturationError(InvalidInputError):
    """Raised when a level-set value is too close to +-1 to invert."""


class SolverError(RuntimeError):
    """Raised when a linear or nonlinear solve fails to converge."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
