"""Error hierarchy shared by the library and the CLI."""

from typing import Optional


class VDTError(Exception):
    """Base error. ``exit_code`` is what ``main.py`` returns for it."""

    exit_code = 1


class ConfigError(VDTError):
    """Invalid or unknown configuration."""

    exit_code = 2


class DataError(VDTError):
    """Unreadable, missing or inconsistent input data."""

    exit_code = 3


class DataFormatError(DataError):
    """Binary feature file does not match the VDTF layout."""

    def __init__(self, message: str, offset: Optional[int] = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)


class DataParseError(DataError):
    """CSV feature file could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ContractError(VDTError):
    """A caller broke an operation's precondition."""

    exit_code = 4


class ShapeError(ContractError):
    """Tensor dimensions do not agree."""


class MathDomainError(ContractError):
    """Input outside the mathematical domain of an operation."""
