"""Waveform core: periodic signals and the closed-form ring oscillator."""

from psync.waveform.ring import (
    RING,
    InverterMode,
    RingOscillatorConstants,
    analytic_ppv,
    analytic_state,
    analytic_waveform,
    inverter_response,
    ring_ppv,
    ring_voltage,
)
from psync.waveform.signal import PeriodicSignal, read_signal_csv, write_signal_csv

__all__ = [
    "RING",
    "InverterMode",
    "PeriodicSignal",
    "RingOscillatorConstants",
    "analytic_ppv",
    "analytic_state",
    "analytic_waveform",
    "inverter_response",
    "read_signal_csv",
    "ring_ppv",
    "ring_voltage",
    "write_signal_csv",
]
