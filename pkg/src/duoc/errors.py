"""Exception hierarchy shared across the package."""


class DuocError(Exception):
    """Base class for all package errors."""


class ShapeError(DuocError):
    """An array has the wrong shape, dimension, or dtype for the operation."""


class DomainError(DuocError):
    """An argument is outside the documented domain of the operation."""


class NormalizationError(DomainError):
    """A vector or weight list is not normalized within tolerance."""


class DegenerateInputError(DomainError):
    """An input is degenerate (zero vector, empty family, ...)."""


class DensityMatrixError(DomainError):
    """A matrix fails the Hermitian / positive / unit-trace checks."""


class NotClassicalError(DomainError):
    """A state expected to be classical (diagonal) is not."""


class NotEntangledError(DomainError):
    """An operation that needs an entangled state received a product state."""


class ValidityError(DuocError):
    """An object that must belong to the model's state or effect set does not."""


class ParseError(DuocError):
    """Script text could not be parsed.

    Carries the 1-based ``line`` and ``col`` of the offending token.
    """

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"line {line}, col {col}: {message}"
        super().__init__(message)


class ScriptError(DuocError):
    """A script parsed but could not be interpreted (bad range, unknown name, ...)."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class AssertionFailure(DuocError):
    """An ``assert`` statement in a script did not hold."""
