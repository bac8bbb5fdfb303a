"""Exception types shared across the package."""


class XlalignError(Exception):
    """Base class for all package errors."""


class FormatError(XlalignError):
    """A file does not conform to the expected text format."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ContractError(XlalignError, ValueError):
    """An operation was called with arguments violating its contract."""


class DegenerateInputError(XlalignError):
    """Input contains a zero vector where the math requires a direction."""


class AlignmentCollapseError(XlalignError):
    """Self-learning induced an empty dictionary; the alignment collapsed."""


class NumericalError(XlalignError):
    """A numerical routine failed or produced non-finite values."""
