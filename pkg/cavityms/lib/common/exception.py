"""Cavity MS lib exceptions.

BaseCavityMSLibException
|-InvalidConfigurationError
|-InvalidDimensionError (ValueError)
|-ContractViolationError (ValueError)
|-SingularParameterError (ValueError)
|-OutputError
|-NumericalError
|   |-IntegrationError
|   |-PositivityError
|   |-SeriesTruncationError
|   |-QuadratureError
|   |-FitError
"""

from __future__ import annotations

from cavityms.common.exception import BaseCavityMSException


class BaseCavityMSLibException(BaseCavityMSException):
    """Base exception class for all library exceptions."""


class InvalidConfigurationError(BaseCavityMSLibException):
    """Raised when given configuration is badly formed."""

    def __init__(self, msg: str, key: str | None = None) -> None:
        """Initialize."""
        self.key = key
        super().__init__(f"{key}: {msg}" if key else msg)


class InvalidDimensionError(BaseCavityMSLibException, ValueError):
    """Operator, state or layout dimensions do not fit together."""


class ContractViolationError(BaseCavityMSLibException, ValueError):
    """An input violates a documented precondition (e.g. hermiticity)."""


class SingularParameterError(BaseCavityMSLibException, ValueError):
    """A parameter sits on a singular point (zero detuning, zero coupling)."""


class OutputError(BaseCavityMSLibException):
    """An output file could not be written."""

    def __init__(self, path: str, reason: str) -> None:
        """Initialize."""
        self.path = path
        super().__init__(f"{path}: {reason}")


class NumericalError(BaseCavityMSLibException):
    """A numerical procedure failed to deliver a trustworthy result."""


class IntegrationError(NumericalError):
    """The ODE solver stopped before reaching the requested time."""


class PositivityError(NumericalError):
    """A propagated density operator lost positivity."""

    def __init__(self, t: float, min_eig: float) -> None:
        """Initialize."""
        self.t = t
        self.min_eig = min_eig
        super().__init__(f"min eigenvalue {min_eig:.3e} at t={t:.6g}")


class SeriesTruncationError(NumericalError):
    """A perturbative sum has not converged at the configured cut-off."""


class QuadratureError(NumericalError):
    """Adaptive quadrature did not converge."""


class FitError(NumericalError):
    """A log-log fit is degenerate."""
