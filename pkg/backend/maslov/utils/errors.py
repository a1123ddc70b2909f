"""
Exception hierarchy for the Maslov-index engine.

Library code raises these; only the command-line layer turns them into
exit codes and structured error JSON.
"""
from typing import Any, Dict, Optional


class MaslovError(Exception):
    """Base class for every failure the engine reports."""

    exit_code = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        """Structured form written to error.json and stdout."""
        return {
            'error': type(self).__name__,
            'message': self.message,
            'details': self.details,
        }


class ConfigError(MaslovError):
    """Invalid configuration, unreadable input or unwritable output."""

    exit_code = 2


class ProfileParseError(ConfigError):
    """Sampled-profile file could not be parsed."""


class ProfileValidationError(ConfigError):
    """Sampled-profile data parsed but is unusable."""


class DomainError(MaslovError):
    """Parameters or spectral parameter outside the admissible set."""


class DegeneracyError(MaslovError):
    """Asymptotic matrix is defective (coincident spatial eigenvalues)."""


class IntegrationError(MaslovError):
    """The ODE integrator failed."""


class NonconvergenceError(MaslovError):
    """Crossing-form series did not close by the maximal order."""


class PreconditionError(MaslovError):
    """An operation was called on data that violates its precondition."""


class GridResolutionError(MaslovError):
    """A sweep grid could not resolve nearby crossings."""


class SolverError(MaslovError):
    """The discretized boundary value problem is singular."""


class AccuracyError(MaslovError):
    """A solve finished but its residual is above tolerance."""


class FredholmError(MaslovError):
    """Right-hand side is not orthogonal to the kernel."""


class UnsupportedCaseError(MaslovError):
    """Degenerate configuration the engine does not handle."""


class InconsistencyError(MaslovError):
    """Two computations that must agree did not."""
