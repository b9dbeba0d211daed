"""Exception hierarchy shared by all modules."""


class L96Error(Exception):
    """Base class for every error raised by this package."""


class ConfigError(L96Error, ValueError):
    """Invalid or inconsistent model configuration."""


class DivergenceError(L96Error, FloatingPointError):
    """A trajectory left the finite/bounded region.

    Parameters
    ----------
    message : str
    step : int
        Index of the step at which the blow-up was detected.
    time : float, optional
        Model time of the failure, when meaningful.
    """

    def __init__(self, message, step, time=None):
        super().__init__(message)
        self.step = step
        self.time = time


class StateError(L96Error, RuntimeError):
    """A stateful object (lag history, buffer) is not ready for the call."""


class DataError(L96Error, ValueError):
    """Input data has the wrong shape, too few rows, or is degenerate."""


class EstimationError(L96Error, ArithmeticError):
    """Least-squares / covariance estimation failed.

    ``last_iterate`` carries the final coefficient vector of an iterative fit
    that did not converge, otherwise ``None``.
    """

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class NumericalError(L96Error, ArithmeticError):
    """A linear-algebra routine failed to converge."""


class ComparisonError(L96Error, ValueError):
    """Two diagnostics reports were built on different grids."""
