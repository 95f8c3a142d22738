"""Exception types shared across the package."""


class TritplaneError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(TritplaneError, ValueError):
    """Operands have incompatible or invalid dimensions."""


class SingularSystemError(TritplaneError, ArithmeticError):
    """A 2x2 system has an exactly zero determinant.

    Only reachable with zero regularization and linearly dependent basis
    columns; callers should retry with a positive lambda.
    """


class CorruptDataError(TritplaneError, ValueError):
    """Encoded data violates the format contract."""


class CorruptHeaderError(CorruptDataError):
    """File header has a bad magic, version, or inconsistent fields."""


class TruncatedPayloadError(CorruptDataError):
    """File body is shorter or longer than the header demands."""


class InvalidTritCodeError(CorruptDataError):
    """Packed trit stream contains the reserved code 0b11."""
