"""Exception types shared across the package."""


class ShorteqError(Exception):
    """Base class for all package-specific errors."""


class AliasError(ShorteqError):
    """A frequency grid is too coarse for the sequence it must represent."""


class FactorizationError(ShorteqError):
    """Spectral factorization could not produce an acceptable factor."""


class SpectralNull(FactorizationError):
    """A spectrum dips to (or below) zero where a division or log is needed."""


class TruncationError(FactorizationError):
    """Too much energy lies beyond the requested tap budget."""


class InvalidBeta(ShorteqError):
    """Target-shape offset would make the target power spectrum negative."""


class SingularSystem(ShorteqError):
    """The design linear system is numerically singular."""


class LengthMismatch(ShorteqError):
    """Input samples do not cover the span required by the detector."""


class TooLarge(ShorteqError):
    """Exhaustive enumeration was requested beyond the allowed budget."""


class ConfigError(ShorteqError):
    """An experiment configuration is invalid."""
