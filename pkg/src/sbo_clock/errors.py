"""Exception types shared across the package."""


class SboClockError(Exception):
    """Base class for all package errors."""


class ConfigError(SboClockError, ValueError):
    """Invalid or inconsistent configuration input."""


class DomainError(SboClockError, ValueError):
    """Argument outside the supported numerical domain."""


class QuadratureError(SboClockError, RuntimeError):
    """Period-average quadrature failed to converge."""


class NumericsError(SboClockError, RuntimeError):
    """A numerical guard tripped (underflow, step size, norm drift)."""


class DegeneratePreparationError(SboClockError, RuntimeError):
    """The preparation pulse selected numerically nothing."""


class GridSizeError(SboClockError, RuntimeError):
    """Requested scan grid exceeds the configured cap."""


class SboValidityWarning(UserWarning):
    """Parameters drift outside the slow-drift regime the model assumes."""
