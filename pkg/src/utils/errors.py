"""Exception types raised across the denoising system."""


class SparseDenoiseError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(SparseDenoiseError, ValueError):
    """An argument violates a documented precondition (shape, range, size)."""


class ImageFormatError(InvalidArgumentError):
    """An image file is unreadable, unsupported, or not grayscale."""


class DictionaryFormatError(InvalidArgumentError):
    """A dictionary file is malformed."""


def require(condition: bool, message: str) -> None:
    """Raise InvalidArgumentError with ``message`` unless ``condition`` holds."""
    if not condition:
        raise InvalidArgumentError(message)
