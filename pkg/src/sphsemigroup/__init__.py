"""Exponential-type multiplier semigroups on spheres: kernels, moduli of smoothness, K-functionals."""

from .errors import ConfigError, DataError, ParameterError, QuadratureError, ResolutionError, TruncationError
from .laplace_series import LaplaceCoefficients
from .multipliers import MultiplierSequence, RegularPolynomial

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DataError",
    "ParameterError",
    "QuadratureError",
    "ResolutionError",
    "TruncationError",
    "LaplaceCoefficients",
    "MultiplierSequence",
    "RegularPolynomial",
]
