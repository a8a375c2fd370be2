"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class EdgeProvisionError(Exception):
    """Base class for all toolkit-specific errors."""


class ModelDomainError(EdgeProvisionError, ValueError):
    """An argument or scenario lies outside the model's domain."""


class InfeasibleTargetError(EdgeProvisionError, ValueError):
    """No finite AP density can reach the requested target MSE.

    Carries the asymptotic MSE (the infinite-density limit) so callers can
    report how far out of reach the target is.
    """

    def __init__(self, message: str, asymptotic_mse: float):
        super().__init__(message)
        self.asymptotic_mse = asymptotic_mse


class BracketError(EdgeProvisionError, ValueError):
    """A root-finding bracket does not contain a sign change."""


class SpecFileError(EdgeProvisionError, ValueError):
    """A sweep specification file could not be parsed."""


class SpecValidationError(EdgeProvisionError, ValueError):
    """A sweep specification violates the schema; message lists every problem."""
