"""Exception types shared across the package."""


class VlcNoiseError(Exception):
    """Base class for all package errors."""


class DataError(VlcNoiseError, ValueError):
    """Invalid input data, file contents or parameters."""


class CaptureFormatError(DataError):
    """A capture file could not be parsed."""


class ModelFormatError(DataError):
    """A model file is truncated, corrupt or of an unsupported version."""


class NumericalError(VlcNoiseError, ArithmeticError):
    """A computation diverged or produced non-finite values."""
