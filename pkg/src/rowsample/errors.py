class InvalidInputError(ValueError):
    """Raised when an argument violates an operation's preconditions."""


class PreconditionError(InvalidInputError):
    """Raised when a size condition required by a guarantee is not met."""


class NumericalFailureError(ArithmeticError):
    """Raised when a numerical routine cannot produce a usable result."""
