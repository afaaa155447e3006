"""Exception types raised by the numerical kernels."""


class DomainError(ValueError):
    """An argument lies outside the domain of the function."""


class InfiniteMeanError(DomainError):
    """The distribution has no finite mean (beta * p <= 1)."""


class NonConvergenceError(ArithmeticError):
    """A series or iteration exhausted its budget without converging."""


class DegenerateConnectionError(NonConvergenceError):
    """The z -> 1-z connection formula is in its logarithmic case and no
    fallback route converged either."""


class ToleranceNotMetError(ArithmeticError):
    """Quadrature finished but its error bound exceeds the requested tolerance.

    The best estimate and its error bound are kept on the exception so the
    caller can still inspect them.
    """

    def __init__(self, message: str, estimate: float, error_bound: float):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound
