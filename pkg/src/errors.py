"""
Exception hierarchy for the uplink scheduling simulator.
"""


class UplinkSimError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(UplinkSimError, ValueError):
    """Invalid or unsupported configuration (CLI exit code 2)."""

    def __init__(self, message: str, problems=None):
        super().__init__(message)
        self.problems = list(problems or [message])


class DomainError(UplinkSimError, ValueError):
    """An argument lies outside the domain of a model function."""


class ContractViolation(UplinkSimError, ValueError):
    """The caller broke the contract of an operation."""


class SolverInfeasibleError(UplinkSimError):
    """The benchmark solver found no feasible point (CLI exit code 3)."""
