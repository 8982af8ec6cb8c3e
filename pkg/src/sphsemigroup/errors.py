"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class QuadratureError(RuntimeError):
    """Quadrature construction failed (eigen-solver trouble)."""


class TruncationError(RuntimeError):
    """A multiplier decays too slowly for the series to be truncated within the cap."""


class ResolutionError(RuntimeError):
    """A sphere grid cannot integrate the requested products exactly."""


class DataError(ValueError):
    """Measured sequences are inconsistent (sign mismatch, length mismatch)."""


class ConfigError(ValueError):
    """Experiment configuration is invalid."""
