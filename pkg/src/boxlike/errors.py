"""Exception hierarchy shared by all modules and mapped to CLI exit codes."""


class BoxLikeError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class InputError(BoxLikeError, ValueError):
    """Malformed or invalid input (IFS data, parameters).

    ``path`` names the offending field, e.g. ``maps[2].p``.
    """

    exit_code = 2

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class BudgetExceededError(BoxLikeError, RuntimeError):
    """An enumeration would exceed its configured budget."""

    exit_code = 3


class ConsistencyError(BoxLikeError, ArithmeticError):
    """Two independently computed quantities disagree beyond tolerance.

    Raised when a structural property that must hold (no straddling of
    ``tau1 + tau2``, analytic vs finite-difference derivatives, ...) fails
    numerically. This signals a bug or a non-smooth point.
    """

    exit_code = 4
