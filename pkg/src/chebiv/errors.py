"""Exception hierarchy shared by the pricing, fitting and IO layers."""


class ChebIVError(Exception):
    """Base class for all package errors."""


class DomainError(ChebIVError, ValueError):
    """An argument lies outside the domain of an operation."""


class InvalidQuoteError(ChebIVError, ValueError):
    """A raw option quote violates its field invariants or no-arbitrage bounds."""


class ArbitrageError(InvalidQuoteError):
    """A premium is at or below intrinsic value, or at or above the upper bound."""


class ConvergenceError(ChebIVError, RuntimeError):
    """An iterative solver or adaptive construction failed to reach its tolerance."""

    def __init__(self, message: str, residual: float | None = None, best=None):
        super().__init__(message)
        self.residual = residual
        self.best = best


class ModelFormatError(ChebIVError, ValueError):
    """A persisted model file is malformed or truncated."""


class ModelVersionError(ModelFormatError):
    """A persisted model file carries an unsupported version tag."""
