"""Exception hierarchy shared by all modules."""


class LemniscateError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(LemniscateError, ValueError):
    """Input violates a precondition (bad ordering, wrong length, inconsistent structure)."""


class OnSetError(ValidationError):
    """A point lies on (or numerically indistinguishable from) the compact set."""


class ConvergenceError(LemniscateError, RuntimeError):
    """An iteration failed to converge.

    Attributes
    ----------
    best : object
        Best iterate found before giving up.
    residual : float
        Residual at ``best``.
    trace : object or None
        Optional iteration history.
    """

    def __init__(self, message, best=None, residual=float("nan"), trace=None):
        super().__init__(message)
        self.best = best
        self.residual = residual
        self.trace = trace
