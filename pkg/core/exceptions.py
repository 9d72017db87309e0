"""
Error types shared by the betafreq services
"""
from django.core.exceptions import ValidationError


class DomainError(ValidationError):
    """Argument outside the domain of an operation"""

    def __init__(self, message, code='domain', params=None):
        super().__init__(message, code=code, params=params)


class LengthMismatchError(DomainError):
    """Two words that must have equal length do not"""

    def __init__(self, message, params=None):
        super().__init__(message, code='length_mismatch', params=params)


class UnsupportedBetaError(ValidationError):
    """The requested computation is not available for this beta"""

    def __init__(self, message, params=None):
        super().__init__(message, code='unsupported_beta', params=params)


class InvalidMeasureError(ValidationError):
    """Malformed cylinder measure or Markov measure"""

    def __init__(self, message, params=None):
        super().__init__(message, code='invalid_measure', params=params)


def error_message(exc: ValidationError) -> str:
    """Flatten a ValidationError into a single line"""
    return '; '.join(exc.messages)
