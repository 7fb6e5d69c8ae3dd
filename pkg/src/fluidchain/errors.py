"""Exception types shared across the package."""


class FluidchainError(Exception):
    """Base class for all package errors."""


class ModelError(FluidchainError):
    """Invalid constitutive law or preset parameters."""


class QuadratureError(FluidchainError):
    """Adaptive quadrature failed to converge.

    Carries the achieved absolute error estimate so callers can report it.
    """

    def __init__(self, message, achieved_error=None):
        super().__init__(message)
        self.achieved_error = achieved_error


class DomainError(FluidchainError):
    """Particle state left the admissible open set (ordering violated or
    non-finite entries)."""


class AdmissibilityError(FluidchainError):
    """Energy budget violates the envelope-limit condition; names the
    failing side ('high' or 'low')."""

    def __init__(self, message, side=None):
        super().__init__(message)
        self.side = side


class StiffnessError(FluidchainError):
    """Adaptive step size underflowed; the viscous coupling is too stiff
    for the explicit pair at this particle count."""


class InitialDataError(FluidchainError):
    """Initial density/velocity profile violates its constraints."""


class ConfigError(FluidchainError):
    """Configuration file is invalid; carries the path to the offending field."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
