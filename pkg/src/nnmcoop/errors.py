"""Exception hierarchy shared by every module."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class NumericalError(ArithmeticError):
    """A numerical procedure failed to reach its requested accuracy."""


class DivergenceError(NumericalError):
    """The requested quantity is infinite for the given parameters."""


class TruncationError(NumericalError):
    """A series cannot be truncated within the requested tail bound."""

    def __init__(self, message, required_n=None):
        super().__init__(message)
        self.required_n = required_n
