"""Step-size, horizon and worker estimation for the simulators.

Design goals:
- Deterministic: derived from the system's natural frequencies only.
- Frequency-invariant: step and horizon are counted in natural periods of
  the fastest/slowest oscillator, so scaling every lambda by c scales dt and
  t_end by 1/c.
- Per-model defaults that can be overridden by config.

`dt` and `t_end` are in the simulators' time unit (period 1 at lambda = 1).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Any, Mapping, Optional, Sequence

from psync.errors import ConfigError

# Model -> coefficients. `direct` needs ~7 steps across the K=50 switching edge;
# `phase` steps by fractions of a cycle.
DEFAULT_MODEL_HORIZONS: dict[str, dict[str, float]] = {
    "direct": {
        "steps_per_period": 1000,
        "periods": 60,
        "window_fraction": 0.5,
    },
    "phase": {
        "steps_per_period": 50,
        "periods": 200,
        "window_fraction": 0.5,
    },
}

_KEYS = ("steps_per_period", "periods", "window_fraction")


@dataclass(frozen=True)
class Horizon:
    dt: float
    t_end: float
    window_fraction: float

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


def _as_float(v: Any, *, default: float) -> float:
    try:
        return float(v)
    except Exception:
        return float(default)


def _merged_model_horizon(model: str, overrides: Mapping[str, Any] | None) -> dict[str, float]:
    if model not in DEFAULT_MODEL_HORIZONS:
        raise ConfigError(f"模型不支持: {model}（允许: {', '.join(DEFAULT_MODEL_HORIZONS)}）")
    base = dict(DEFAULT_MODEL_HORIZONS[model])
    if not isinstance(overrides, Mapping):
        return base
    for k in _KEYS:
        if overrides.get(k) is not None:
            base[k] = _as_float(overrides[k], default=base[k])
    return base


def estimate_horizon(
    model: str,
    lambdas: Sequence[float],
    *,
    overrides: Mapping[str, Any] | None = None,
) -> Horizon:
    """Default (dt, t_end) for `model` given the oscillators' lambdas."""
    est = _merged_model_horizon(model, overrides)
    lam = [float(x) for x in lambdas]
    fastest = max(lam)
    slowest = min(lam)
    dt = 1.0 / (est["steps_per_period"] * fastest)
    # Whole number of steps, counted from the lambda ratio so it is invariant under scaling.
    n_steps = math.ceil(est["periods"] * est["steps_per_period"] * (fastest / slowest) - 1e-6)
    return Horizon(dt=dt, t_end=n_steps * dt, window_fraction=float(est["window_fraction"]))


def available_parallelism() -> int:
    if hasattr(os, "sched_getaffinity"):
        try:
            return max(1, len(os.sched_getaffinity(0)))
        except OSError:
            pass
    return max(1, os.cpu_count() or 1)


def resolve_workers(requested: Optional[int], *, tasks: int) -> int:
    """`requested` <= 0 or None means available parallelism; never more than `tasks`."""
    n = available_parallelism() if not requested or int(requested) <= 0 else int(requested)
    return int(max(1, min(n, max(1, tasks))))
