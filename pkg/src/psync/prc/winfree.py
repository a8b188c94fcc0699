"""PRC by pulse probing: kick node 3 at each probe phase, measure the settled shift.

All probes run as one batch next to an unperturbed reference row, with a fixed
RK4 step that divides the period into a multiple of the probe count so every
pulse starts exactly on a step.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from psync.errors import ConfigError, ProbeFailureError
from psync.prc.limit_cycle import LimitCycle, compute_limit_cycle
from psync.prc.result import PrcResult
from psync.simulation.direct import RingOscillatorSpec, rising_crossings, ring_field
from psync.simulation.integrator import rk4_step
from psync.waveform.signal import PeriodicSignal

MIN_RESOLUTION = 32
TARGET_STEPS_PER_PERIOD = 1000
MEASURE_PERIODS = 2
MAX_PERIOD_ERROR = 0.05


def _wrap_half(z: np.ndarray) -> np.ndarray:
    """Wrap to (-0.5, 0.5]."""
    return -np.mod(-z + 0.5, 1.0) + 0.5


def winfree_prc(
    osc: RingOscillatorSpec,
    amplitude: float = 0.05,
    pulse_width: float = 0.01,
    resolution: int = 256,
    *,
    settle_periods: int = 5,
    cycle: Optional[LimitCycle] = None,
) -> PrcResult:
    if not (math.isfinite(amplitude) and amplitude > 0):
        raise ConfigError(f"amplitude 必须 > 0: {amplitude}")
    if not (0 < pulse_width < 0.5):
        raise ConfigError(f"pulse_width 必须在 (0, 0.5): {pulse_width}")
    if int(resolution) < MIN_RESOLUTION:
        raise ConfigError(f"resolution 必须 >= {MIN_RESOLUTION}: {resolution}")
    if int(settle_periods) < 1:
        raise ConfigError(f"settle_periods 必须 >= 1: {settle_periods}")

    res = int(resolution)
    cycle = cycle or compute_limit_cycle(osc)
    period = cycle.period
    steps = res * math.ceil(TARGET_STEPS_PER_PERIOD / res)
    dt = period / steps
    per_probe = steps // res
    pulse_steps = max(1, int(round(pulse_width * steps)))
    width = pulse_steps / steps

    # One lead-in period so pulses centred on early phases start after t = 0.
    onsets = steps + np.arange(res) * per_probe - pulse_steps // 2
    total = 2 * steps + int(settle_periods) * steps + MEASURE_PERIODS * steps + steps // 4
    record_from = total - (MEASURE_PERIODS * steps + steps // 4)

    rate = osc.rate
    mode = osc.inverter
    kick = osc.lam * amplitude
    forcing = np.zeros(res + 1)

    def rhs(t: float, y: np.ndarray, step: int) -> np.ndarray:
        dv = ring_field(y, rate, mode)
        active = (step >= onsets) & (step < onsets + pulse_steps)
        forcing[:res] = np.where(active, kick, 0.0)
        dv[:, 2] += forcing
        return dv

    y = np.tile(cycle.states(0.0)[0], (res + 1, 1))
    v3 = np.empty((total - record_from + 1, res + 1))
    for k in range(total):
        if k >= record_from:
            v3[k - record_from] = y[:, 2]
        y = rk4_step(rhs, k * dt, y, dt, k)
    v3[-1] = y[:, 2]
    times = (record_from + np.arange(v3.shape[0])) * dt

    phases = np.arange(res) / res
    ref = rising_crossings(times, v3[:, res])
    if ref.size < 2:
        raise ProbeFailureError("参考轨迹未振荡", phase=float("nan"))
    ref_period = float(np.mean(np.diff(ref)))

    shifts = np.empty(res)
    for j in range(res):
        probe = rising_crossings(times, v3[:, j])
        if probe.size < 2:
            raise ProbeFailureError(f"探针轨迹振荡消失: phase={phases[j]:.4f}", phase=phases[j])
        probe_period = float(np.mean(np.diff(probe)))
        if abs(probe_period - ref_period) > MAX_PERIOD_ERROR * ref_period:
            raise ProbeFailureError(f"探针轨迹未回到极限环: phase={phases[j]:.4f}", phase=phases[j])
        count = min(ref.size, probe.size)
        # Positive when the probe crosses earlier, i.e. the pulse advanced it.
        lag = (ref[:count] - probe[:count]) / ref_period
        shifts[j] = float(np.mean(_wrap_half(lag)))

    prc = shifts / (osc.lam * amplitude * width * ref_period)
    return PrcResult(
        signal=PeriodicSignal(prc),
        method="winfree",
        diagnostics={
            "amplitude": float(amplitude),
            "pulse_width": float(pulse_width),
            "effective_width": width,
            "settle_periods": int(settle_periods),
            "steps_per_period": steps,
            "period": ref_period,
            "raw_shift_amplitude": float(np.max(np.abs(shifts))),
            "normalized_shift_amplitude": float(np.max(np.abs(shifts)) / amplitude),
            "prc_amplitude": float(np.max(np.abs(prc))),
        },
        waveform=cycle.waveform(3, res),
    )
