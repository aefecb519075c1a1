"""Shared exception types.

Every error that carries numerical context (a state point, a partial
curve) stores it on the exception instance so callers can report
witnesses instead of bare messages.
"""


class ConfigurationError(ValueError):
    """Bad catalog identifier or out-of-range parameters."""


class DomainError(ValueError):
    """A state point lies outside the system's domain of validity."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class HyperbolicityError(ArithmeticError):
    """Complex or coincident characteristic speeds at a point."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class ContinuationError(RuntimeError):
    """Predictor-corrector failure; carries the last good sample."""

    def __init__(self, message, last_sample=None):
        super().__init__(message)
        self.last_sample = last_sample


class EmptyLevelError(ValueError):
    """Requested level lies at or below the minimum of the function."""


class DecompositionError(RuntimeError):
    """Sector vectors failed to classify a level-curve sample."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class RankOneConnectionError(ValueError):
    """A candidate tuple contains a rank-one connected pair."""

    def __init__(self, message, pair=None, residual=None):
        super().__init__(message)
        self.pair = pair
        self.residual = residual


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to meet its tolerance."""
