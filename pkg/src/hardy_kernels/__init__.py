"""Heat kernels and ground states of fractional Schrödinger operators with Hardy potentials."""

from .errors import ConfigError, DomainError, FormatError, HardyKernelsError, NumericError
from .hardy_map import HardyCoupling, delta_of_kappa, h_factor, kappa_of_delta, kappa_star
from .levy_models import LevyModel, check_profile_conditions
from .report import AuditReport

__all__ = [
    "AuditReport",
    "ConfigError",
    "DomainError",
    "FormatError",
    "HardyCoupling",
    "HardyKernelsError",
    "LevyModel",
    "NumericError",
    "check_profile_conditions",
    "delta_of_kappa",
    "h_factor",
    "kappa_of_delta",
    "kappa_star",
]

__version__ = "0.1.0"
