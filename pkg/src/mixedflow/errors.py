"""Exception and warning types raised across the package."""


class InvalidInputError(ValueError):
    """Malformed or dimensionally inconsistent input."""


class DomainError(ValueError):
    """Input lies outside the region where a closed form is valid."""


class DegenerateInputError(ValueError):
    """Input that makes an estimator meaningless (e.g. a zero direction)."""


class SolverWarning(RuntimeWarning):
    """Inner fixed-point iteration did not reach its tolerance.

    The last iterate and its residual are attached so callers can decide
    whether to shrink the step size and retry.
    """

    def __init__(self, message, iterate=None, residual=float("nan")):
        super().__init__(message)
        self.iterate = iterate
        self.residual = residual
