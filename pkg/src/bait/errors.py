"""Exception types shared across the package."""


class BaitError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(BaitError, ValueError):
    """Operand shapes are inconsistent; the message names both shapes."""


class ParameterError(BaitError, ValueError):
    """A configuration or argument value is outside its legal range."""


class DegenerateInputError(BaitError, ValueError):
    """Input is structurally valid but has no usable content."""


class IntegrityError(BaitError, ValueError):
    """Cross-referenced records disagree (duplicate ids, mask mismatches, dangling references)."""


class ContractError(BaitError, RuntimeError):
    """An internal calling contract was violated."""


class ParseError(BaitError, ValueError):
    """A text input file could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class StoreFormatError(BaitError, ValueError):
    """An embedding-store or checkpoint file violates the binary layout."""


class StoreMagicError(StoreFormatError):
    """The file does not start with the expected magic bytes."""


class StoreVersionError(StoreFormatError):
    """The file declares an unsupported format version."""


class StoreDimensionError(StoreFormatError):
    """A record's width disagrees with the dimension declared in the header."""


class StoreTruncatedError(StoreFormatError):
    """The payload ends before the declared records are complete."""


class StoreValueError(StoreFormatError):
    """The payload contains non-finite floats."""


class NumericalError(BaitError, ArithmeticError):
    """A numerical routine failed to produce a usable result."""
