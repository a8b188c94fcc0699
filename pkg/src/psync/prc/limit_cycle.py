"""Numerically settled limit cycle of a single ring.

Phase 0 is anchored to the closed-form convention: v3 rises through zero at
phase 0.5, so extracted curves line up with the analytic ones without a shift.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from psync.errors import NoOscillationError
from psync.simulation.direct import RingOscillatorSpec, ring_field
from psync.waveform.ring import analytic_state
from psync.waveform.signal import DEFAULT_RESOLUTION, PeriodicSignal

ANCHOR_PHASE = 0.5
SETTLE_PERIODS = 20
RTOL = 1e-10
ATOL = 1e-12


@dataclass(frozen=True)
class LimitCycle:
    osc: RingOscillatorSpec
    period: float
    # Maps time since the anchoring crossing, in [0, period], to the (3,) state.
    solution: Optional[Callable[[Any], np.ndarray]] = None

    def time_of(self, phases: Any) -> np.ndarray:
        return np.mod(np.asarray(phases, dtype=float) - ANCHOR_PHASE, 1.0) * self.period

    def states(self, phases: Any) -> np.ndarray:
        """States at `phases`, shape (len, 3)."""
        p = np.atleast_1d(np.asarray(phases, dtype=float))
        if self.solution is None:
            return np.stack([analytic_state(float(x)) for x in p])
        return np.asarray(self.solution(self.time_of(p)), dtype=float).T

    def velocities(self, phases: Any) -> np.ndarray:
        return ring_field(self.states(phases), self.osc.rate, self.osc.inverter)

    def waveform(self, node: int = 3, resolution: int = DEFAULT_RESOLUTION) -> PeriodicSignal:
        return PeriodicSignal(self.states(np.arange(resolution) / resolution)[:, node - 1])


def _rising_v3(t: float, y: np.ndarray) -> float:
    return y[2]


_rising_v3.direction = 1.0


def compute_limit_cycle(osc: RingOscillatorSpec, *, settle_periods: int = SETTLE_PERIODS) -> LimitCycle:
    """Settle the ring, time two rising v3 crossings and keep one dense period.

    The hard-switching ring already sits on the closed-form cycle, which is
    returned directly.
    """
    if not osc.inverter.is_smooth:
        return LimitCycle(osc=osc, period=1.0 / osc.lam)

    rate = osc.rate
    mode = osc.inverter

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        return ring_field(y, rate, mode)

    natural = 1.0 / osc.lam
    settled = solve_ivp(
        rhs, (0.0, settle_periods * natural), analytic_state(0.0),
        method="DOP853", rtol=RTOL, atol=ATOL,
    )
    timing = solve_ivp(
        rhs, (0.0, 3.0 * natural), settled.y[:, -1],
        method="DOP853", rtol=RTOL, atol=ATOL, events=_rising_v3,
    )
    crossings = timing.t_events[0]
    if crossings.size < 2:
        raise NoOscillationError(f"极限环未振荡: 上升过零点 {crossings.size} 个")
    period = float(crossings[1] - crossings[0])
    anchor = timing.y_events[0][0]
    cycle = solve_ivp(
        rhs, (0.0, period), anchor,
        method="DOP853", rtol=RTOL, atol=ATOL, dense_output=True,
    )
    return LimitCycle(osc=osc, period=period, solution=cycle.sol)
