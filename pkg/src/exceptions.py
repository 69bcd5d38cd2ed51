"""Custom exception classes for the UIC codec."""


class CodecException(Exception):
    """Base exception for the UIC codec."""

    pass


class ValidationError(CodecException):
    """Exception raised for invalid parameters or flags."""

    pass


class DimensionError(CodecException):
    """Exception raised when shapes or geometry do not fit together."""

    pass


class ImageFormatError(CodecException):
    """Exception raised for malformed or unsupported PGM input."""

    pass


class QuantizationError(CodecException):
    """Exception raised when a quantized symbol leaves the alphabet."""

    pass


class EntropyCodingError(CodecException):
    """Exception raised for corrupt code tables or truncated bit-streams."""

    pass


class ContainerError(CodecException):
    """Exception raised when a .uic container cannot be decoded."""

    pass


class StorageError(CodecException):
    """Exception raised for storage-related errors."""

    pass
