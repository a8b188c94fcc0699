"""Fixed-step classical Runge-Kutta used by every simulator in the package."""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from psync.errors import ContractError

# rhs(t, y, step) -> dy/dt; `step` is the index of the step being taken, so a
# forcing term can be held constant across all four stages of a step.
Rhs = Callable[[float, np.ndarray, int], np.ndarray]
Guard = Callable[[int, float, np.ndarray, np.ndarray], None]


def step_count(t_end: float, dt: float) -> int:
    if not (np.isfinite(dt) and dt > 0):
        raise ContractError(f"dt 必须 > 0: {dt}")
    if not (np.isfinite(t_end) and t_end >= dt):
        raise ContractError(f"t_end 必须 >= dt: t_end={t_end}, dt={dt}")
    return int(round(t_end / dt))


def rk4_step(rhs: Rhs, t: float, y: np.ndarray, h: float, step: int = 0) -> np.ndarray:
    k1 = rhs(t, y, step)
    k2 = rhs(t + 0.5 * h, y + (0.5 * h) * k1, step)
    k3 = rhs(t + 0.5 * h, y + (0.5 * h) * k2, step)
    k4 = rhs(t + h, y + h * k3, step)
    return y + (h / 6.0) * (k1 + k4) + (h / 3.0) * (k2 + k3)


def integrate_fixed(
    rhs: Rhs,
    y0: np.ndarray,
    dt: float,
    n_steps: int,
    *,
    guard: Optional[Guard] = None,
) -> np.ndarray:
    """Return states of shape (n_steps + 1, *y0.shape), states[k] at t = k * dt.

    `guard(step, t, y, dydt)` sees the first-stage slope of every step and may
    raise to abort the integration.
    """
    y = np.array(y0, dtype=float)
    states = np.empty((n_steps + 1,) + y.shape, dtype=float)
    states[0] = y
    half = 0.5 * dt
    sixth = dt / 6.0
    third = dt / 3.0
    for k in range(n_steps):
        t = k * dt
        k1 = rhs(t, y, k)
        if guard is not None:
            guard(k, t, y, k1)
        k2 = rhs(t + half, y + half * k1, k)
        k3 = rhs(t + half, y + half * k2, k)
        k4 = rhs(t + dt, y + dt * k3, k)
        y = y + sixth * (k1 + k4) + third * (k2 + k3)
        states[k + 1] = y
    return states


def uniform_times(n_steps: int, dt: float) -> np.ndarray:
    return np.arange(n_steps + 1, dtype=float) * dt
