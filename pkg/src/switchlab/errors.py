"""Exception hierarchy. Each class maps onto one CLI exit code."""


class SwitchlabError(Exception):
    """Base class for all package errors."""


class InvalidArgument(SwitchlabError, ValueError):
    """A parameter violates an operation's precondition."""


class InsufficientData(SwitchlabError, ValueError):
    """Too few samples, bins or extrema for the requested computation."""


class EmptyDistribution(InsufficientData):
    """No extrema produced a usable conditioned sample."""


class UndefinedCorrelation(SwitchlabError, ValueError):
    """Correlation or moment ratio undefined, e.g. for a constant input."""


class NumericsError(SwitchlabError, ArithmeticError):
    """Quadrature or sampling failed; ``diagnostics`` carries the details."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class TickDataError(SwitchlabError, ValueError):
    """Problem in a tick file; ``row`` is the 1-based line number (header is line 1)."""

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class TickParseError(TickDataError):
    pass


class OrderViolation(TickDataError):
    pass


class TickValidationError(TickDataError):
    pass
