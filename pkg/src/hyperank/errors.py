"""Shared exception types."""


class DataValidationError(ValueError):
    """Raised when an input file or in-memory structure violates a contract.

    The CLI maps this to exit code 2. Messages should carry file/line
    context when the problem comes from a file.
    """
