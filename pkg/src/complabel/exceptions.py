"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Raised when an argument violates an operation's preconditions."""


class UnsupportedError(ValueError):
    """Raised when an operation is not defined for the requested loss kind."""


class UnsupportedGradientError(UnsupportedError):
    """Raised when a gradient is requested for an evaluation-only loss."""


class DataError(InvalidInputError):
    """Raised for malformed dataset files."""
