"""Wall-clock comparison of the phase model against direct simulation."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Optional, Sequence

import numpy as np

from psync.errors import BenchmarkError, ConfigError, ContractError
from psync.prc import extract_prc
from psync.prc.result import METHODS, PrcResult
from psync.simulation.direct import (
    DEFAULT_PORT_GAIN,
    CoupledSystemSpec,
    RingOscillatorSpec,
    initial_phases,
    integrate,
    state_from_phases,
)
from psync.simulation.phase import PhaseSystem, integrate_phases
from psync.simulation.resources import estimate_horizon
from psync.waveform.ring import InverterMode

# The timer must resolve the shortest run to within this fraction.
MAX_TIMER_FRACTION = 0.01


@dataclass(frozen=True)
class SpeedupReport:
    n: int
    trials: int
    t_end: float
    timings: dict[str, dict[str, float]]
    speedups: dict[str, float]
    lambdas: list[float] = field(default_factory=list)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ContractError(f"trials 必须 >= 1: {self.trials}")
        for name, stats in self.timings.items():
            if not all(v > 0 for v in stats.values()):
                raise ContractError(f"计时必须 > 0: {name}")

    def as_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "trials": self.trials,
            "t_end": self.t_end,
            "lambda": list(self.lambdas),
            "seed": self.seed,
            "timings": self.timings,
            "speedups": self.speedups,
        }


def time_trials(fn: Callable[[], Any], trials: int) -> np.ndarray:
    """Durations of `trials` sequential calls after one discarded warm-up call."""
    if int(trials) < 1:
        raise ConfigError(f"trials 必须 >= 1: {trials}")
    fn()
    durations = []
    for _ in range(int(trials)):
        start = time.perf_counter()
        fn()
        durations.append(time.perf_counter() - start)
    out = np.array(durations)
    resolution = time.get_clock_info("perf_counter").resolution
    shortest = float(out.min())
    if shortest <= 0 or resolution > MAX_TIMER_FRACTION * shortest:
        raise BenchmarkError(
            f"计时器分辨率 {resolution:.3g}s 超过最短运行 {shortest:.3g}s 的 1%，请增大 t_end"
        )
    return out


def _stats(durations: np.ndarray) -> dict[str, float]:
    return {
        "mean": float(durations.mean()),
        "min": float(durations.min()),
        "max": float(durations.max()),
    }


def speedup_ratio(
    baseline: Callable[[], Any], candidate: Callable[[], Any], trials: int
) -> float:
    return float(time_trials(baseline, trials).mean() / time_trials(candidate, trials).mean())


def bench_speedup(
    n: int,
    trials: int = 100,
    t_end: float = 20.0,
    methods: Sequence[str] = METHODS,
    *,
    seed: int = 0,
    epsilon: float = 0.2,
    inverter: InverterMode = InverterMode(),
    include_self: bool = False,
    port_gain: float = DEFAULT_PORT_GAIN,
    prc_settings: Optional[Mapping[str, Any]] = None,
    prcs: Optional[Mapping[str, PrcResult]] = None,
) -> SpeedupReport:
    """Time direct and phase simulation of one seeded system over the same duration.

    PRC extraction happens before timing; only the integrations are timed,
    one after another on this thread.
    """
    if int(n) < 1:
        raise ConfigError(f"n 必须 >= 1: {n}")
    unknown = [m for m in methods if m not in METHODS]
    if unknown or not methods:
        raise ConfigError(f"PRC 方法不支持: {unknown}（允许: {', '.join(METHODS)}）")

    rng = np.random.default_rng(seed)
    lambdas = [1.0] + rng.uniform(0.8, 1.2, int(n) - 1).tolist()
    spec = CoupledSystemSpec.uniform(
        lambdas, epsilon, inverter=inverter, include_self=include_self, port_gain=port_gain
    )
    phases = initial_phases(spec.n, seed)
    v0 = state_from_phases(phases)
    direct_dt = estimate_horizon("direct", lambdas).dt
    phase_dt = estimate_horizon("phase", lambdas).dt
    if t_end < max(direct_dt, phase_dt):
        raise ConfigError(f"t_end 太短: {t_end}")

    timings = {"direct": _stats(time_trials(lambda: integrate(spec, v0, t_end, direct_dt), trials))}
    speedups: dict[str, float] = {}
    for method in methods:
        prc = (prcs or {}).get(method) or extract_prc(
            method, RingOscillatorSpec(1.0, inverter), prc_settings
        )
        system = PhaseSystem.from_spec(spec, prc.signal, prc.coupling_waveform())
        durations = time_trials(lambda: integrate_phases(system, phases, t_end, phase_dt), trials)
        timings[method] = _stats(durations)
        speedups[method] = timings["direct"]["mean"] / timings[method]["mean"]

    return SpeedupReport(
        n=int(n),
        trials=int(trials),
        t_end=float(t_end),
        timings=timings,
        speedups=speedups,
        lambdas=lambdas,
        seed=int(seed),
    )
