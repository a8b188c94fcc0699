"""psync: coupled ring-oscillator synchronization, direct and phase-model."""

__all__ = ["__version__"]
__version__ = "0.1.0"
