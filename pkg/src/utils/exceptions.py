"""
Custom exceptions for the bridge laboratory.
"""

from typing import Optional


class LabError(Exception):
    """Base exception for all laboratory errors."""

    exit_code = 3

    def __init__(self, message: str, code: Optional[str] = None, details: Optional[dict] = None):
        """
        Initialize the exception.

        Args:
            message: Error message.
            code: Error code.
            details: Additional error details.
        """
        self.message = message
        self.code = code or self.__class__.__name__.upper()
        self.details = details or {}
        super().__init__(self.message)

    def to_dict(self) -> dict:
        """
        Convert the exception to a dictionary.

        Returns:
            Dict representation of the exception.
        """
        return {
            "code": self.code,
            "message": self.message,
            "details": self.details
        }


# Domain errors (exit code 2)

class DomainError(LabError):
    """Input outside the domain of an operation (dimension, branch, shift or exponent)."""
    exit_code = 2


class DegenerateBridgeError(DomainError):
    """Trace level at the Escobar threshold, where no bridge profile exists."""
    pass


class ConfigurationError(LabError):
    """Exception raised for configuration errors."""
    exit_code = 2


class ValidationError(LabError):
    """Exception raised for validation errors."""
    exit_code = 2

    def __init__(self, message: str, field: Optional[str] = None, details: Optional[dict] = None):
        """
        Initialize the exception.

        Args:
            message: Error message.
            field: Field that failed validation.
            details: Additional error details.
        """
        details = details or {}
        if field:
            details["field"] = field
        super().__init__(message, "VALIDATION_ERROR", details)


# Numerical failures (exit code 3)

class GeometryError(LabError):
    """Model point off its quadric or malformed geometric input."""
    pass


class IsometryError(LabError):
    """Image of the half-space is not a geodesic ball to tolerance."""
    pass


class IntegralError(LabError):
    """Divergent integral or disagreement between quadrature cross-checks."""
    pass


class RootError(LabError):
    """Shift scan or root refinement failed."""
    pass


class ELConsistencyError(LabError):
    """Euler-Lagrange multipliers or the energy identity are inconsistent."""
    pass


class TransportError(LabError):
    """Transported norm is not positive on a nonzero field."""
    pass


class GridError(LabError):
    """Radial discretization did not converge under refinement."""
    pass


class NegativityError(LabError):
    """A sector bottom is negative beyond tolerance."""
    pass


class KernelMismatchError(LabError):
    """Tangent fields do not reduce to the first radial eigenfunction."""
    pass


class ProjectionError(LabError):
    """Constraint projection Newton iteration failed."""
    pass


class NearestPointError(LabError):
    """Nearest point search on the bridge orbit failed."""
    pass


# I/O (exit code 4)

class OutputError(LabError):
    """Reading configuration or writing an artifact failed."""
    exit_code = 4
