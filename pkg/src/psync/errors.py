"""Exception hierarchy shared by the simulators, extractors and the CLI.

Every class carries the process exit code the CLI returns for it.
"""

from __future__ import annotations

from typing import Optional


class PsyncError(Exception):
    """Base class for all psync failures."""

    exit_code = 4


class ConfigError(PsyncError, ValueError):
    """Raised when configuration validation fails."""

    exit_code = 2


class UnsupportedConfigurationError(ConfigError):
    """A valid configuration that the requested operation cannot work with."""


class ContractError(PsyncError, ValueError):
    """Caller broke an operation precondition (shape, index, empty input)."""

    exit_code = 2


class DomainError(ContractError):
    """Non-finite or out-of-domain numeric argument."""


class DataFormatError(PsyncError, ValueError):
    """An input file does not match the expected record layout."""

    exit_code = 3

    def __init__(self, message: str, *, field: Optional[str] = None) -> None:
        super().__init__(message)
        self.field = field


class NumericalError(PsyncError, RuntimeError):
    """Base class for integration and extraction failures."""

    exit_code = 4


class InstabilityError(NumericalError):
    def __init__(self, message: str, *, time: float) -> None:
        super().__init__(message)
        self.time = float(time)


class NoOscillationError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    def __init__(self, message: str, *, residual: float) -> None:
        super().__init__(message)
        self.residual = float(residual)


class ProbeFailureError(NumericalError):
    def __init__(self, message: str, *, phase: float) -> None:
        super().__init__(message)
        self.phase = float(phase)


class SweepError(NumericalError):
    def __init__(self, message: str, *, invalid_cells: int) -> None:
        super().__init__(message)
        self.invalid_cells = int(invalid_cells)


class BenchmarkError(NumericalError):
    pass


__all__ = [
    "BenchmarkError",
    "ConfigError",
    "ContractError",
    "ConvergenceError",
    "DataFormatError",
    "DomainError",
    "InstabilityError",
    "NoOscillationError",
    "NumericalError",
    "ProbeFailureError",
    "PsyncError",
    "SweepError",
    "UnsupportedConfigurationError",
]
