"""Closed-form three-inverter ring oscillator: constants, inverter, waveform and PPV.

Time is normalized so the free-running ring has period 1. Node 1 starts its
rising branch at phase 0; node 3 rises through zero at phase 0.5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from psync.errors import ConfigError, DomainError
from psync.waveform.signal import DEFAULT_RESOLUTION, PeriodicSignal

MIN_RESOLUTION = 8
DEFAULT_SMOOTHING = 50.0

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class RingOscillatorConstants:
    psi: float = (1.0 + math.sqrt(5.0)) / 2.0

    @property
    def gamma(self) -> float:
        return 6.0 * math.log(self.psi)

    @property
    def rc(self) -> float:
        return 1.0 / self.gamma

    @property
    def ppv_coefficient(self) -> float:
        psi3 = self.psi**3
        return (1.0 + psi3) / (self.gamma * (4.0 - 2.0 * psi3))


RING = RingOscillatorConstants()

# Offsets such that v_node(p) = v_1(p - offset) and Gamma_node(p) = Gamma_3(p - offset).
_VOLTAGE_OFFSET = {1: 0.0, 2: 2.0 / 3.0, 3: 1.0 / 3.0}
_PPV_OFFSET = {1: 2.0 / 3.0, 2: 1.0 / 3.0, 3: 0.0}


@dataclass(frozen=True)
class InverterMode:
    """Hard sign (`ideal`) or a tanh surrogate with origin slope `gain`."""

    kind: str = "smoothed"
    gain: float = DEFAULT_SMOOTHING

    def __post_init__(self) -> None:
        if self.kind not in {"ideal", "smoothed"}:
            raise ConfigError(f"inverter 模式不支持: {self.kind}（允许: ideal, smoothed）")
        if self.kind == "smoothed" and not (math.isfinite(self.gain) and self.gain > 0):
            raise ConfigError(f"smoothing 必须 > 0: {self.gain}")

    @classmethod
    def ideal(cls) -> "InverterMode":
        return cls(kind="ideal", gain=0.0)

    @classmethod
    def smoothed(cls, gain: float = DEFAULT_SMOOTHING) -> "InverterMode":
        return cls(kind="smoothed", gain=float(gain))

    @property
    def is_smooth(self) -> bool:
        return self.kind == "smoothed"

    def respond(self, v: np.ndarray) -> np.ndarray:
        if self.kind == "ideal":
            return np.where(v > 0.0, 1.0, -1.0)
        return np.tanh(self.gain * v)

    def slope(self, v: np.ndarray) -> np.ndarray:
        if self.kind == "ideal":
            return np.zeros_like(np.asarray(v, dtype=float))
        t = np.tanh(self.gain * v)
        return self.gain * (1.0 - t * t)

    def describe(self) -> str:
        return "ideal" if self.kind == "ideal" else f"smoothed({self.gain:g})"


def inverter_response(v: ArrayLike, mode: InverterMode = InverterMode()) -> ArrayLike:
    x = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError(f"电压必须是有限值: {v!r}")
    out = mode.respond(x)
    return float(out) if out.ndim == 0 else out


def _check_node(node: int) -> int:
    if node not in _VOLTAGE_OFFSET:
        raise ConfigError(f"node 必须是 1、2 或 3: {node}")
    return int(node)


def ring_voltage(node: int, phase: ArrayLike) -> ArrayLike:
    """Closed-form node voltage of the free-running ring."""
    node = _check_node(node)
    t = np.mod(np.asarray(phase, dtype=float) - _VOLTAGE_OFFSET[node], 1.0)
    rising = 1.0 - RING.psi * np.exp(-RING.gamma * t)
    falling = -1.0 + RING.psi * np.exp(-RING.gamma * (t - 0.5))
    out = np.where(t < 0.5, rising, falling)
    return float(out) if out.ndim == 0 else out


def ring_ppv(node: int, phase: ArrayLike) -> ArrayLike:
    """Closed-form PPV, sampled on one period and wrapped."""
    node = _check_node(node)
    t = np.mod(np.asarray(phase, dtype=float) - _PPV_OFFSET[node], 1.0)
    step = np.where(t >= 0.5, 1.0, 0.0)
    bracket = RING.psi + 2.0 * (-1.0 + (-1.0 + 2.0 / RING.psi) * step)
    out = RING.ppv_coefficient * bracket * np.exp(RING.gamma * t)
    return float(out) if out.ndim == 0 else out


def _check_resolution(resolution: int) -> int:
    if int(resolution) < MIN_RESOLUTION:
        raise ConfigError(f"resolution 必须 >= {MIN_RESOLUTION}: {resolution}")
    return int(resolution)


def analytic_waveform(node: int = 3, resolution: int = DEFAULT_RESOLUTION) -> PeriodicSignal:
    m = _check_resolution(resolution)
    return PeriodicSignal(ring_voltage(node, np.arange(m) / m))


def analytic_ppv(node: int = 3, resolution: int = DEFAULT_RESOLUTION) -> PeriodicSignal:
    m = _check_resolution(resolution)
    return PeriodicSignal(ring_ppv(node, np.arange(m) / m))


def analytic_state(phase: float) -> np.ndarray:
    """The three node voltages of the closed-form cycle at `phase`."""
    return np.array([ring_voltage(k, phase) for k in (1, 2, 3)], dtype=float)
