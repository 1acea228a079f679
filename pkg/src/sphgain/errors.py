"""Exception and warning types raised across the package."""


class SphGainError(ValueError):
    """Base class; ``code`` is the short machine-readable tag the CLI prints."""

    code = "error"


class DomainError(SphGainError):
    code = "domain"


class InvalidSchemeError(SphGainError):
    code = "invalid-scheme"


class GridMismatchError(SphGainError):
    code = "grid-mismatch"


class GridTooSmallError(SphGainError):
    code = "grid-too-small"


class NotQuadratureGridError(SphGainError):
    code = "non-quadrature-grid"


class NotTransformGridError(SphGainError):
    code = "non-transform-grid"


class SingularSystemError(SphGainError):
    code = "singular-system"


class MalformedFileError(SphGainError):
    code = "malformed-file"


class DecimationError(SphGainError):
    code = "non-divisor-decimation"


class PatternError(SphGainError):
    code = "invalid-pattern"


class ZeroSignalError(SphGainError):
    code = "zero-signal"


class IllConditionedWarning(RuntimeWarning):
    """A per-order linear solve had a condition estimate above the threshold."""
