"""Degree-of-synchronization surfaces over two swept natural frequencies.

All oscillators but the last two sit at lambda = 1; the last two take the
grid values. Cells are independent: each gets its own seed derived from
(seed, i, j), so a surface does not depend on the worker count.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Any, Mapping, Optional

import numpy as np

from psync.analysis.metrics import degree_of_sync
from psync.errors import ConfigError, ContractError, NumericalError, SweepError
from psync.prc import extract_prc
from psync.prc.result import METHODS, PrcResult
from psync.simulation.direct import (
    DEFAULT_PORT_GAIN,
    CoupledSystemSpec,
    RingOscillatorSpec,
    initial_phases,
    integrate,
    measure_frequencies,
    state_from_phases,
)
from psync.simulation.phase import PhaseSystem, extract_frequencies, integrate_phases
from psync.simulation.resources import estimate_horizon, resolve_workers
from psync.waveform.ring import InverterMode
from psync.waveform.signal import PeriodicSignal

SWEEP_METHODS = METHODS + ("direct",)
SEED_POLICY = "SeedSequence([seed, i, j])"


@dataclass(frozen=True)
class SweepSettings:
    method: str = "analytic"
    epsilon: float = 0.2
    n: int = 3
    grid_size: int = 21
    value_range: tuple[float, float] = (0.8, 1.2)
    seed: int = 0
    include_self: bool = False
    inverter: InverterMode = field(default_factory=InverterMode)
    port_gain: float = DEFAULT_PORT_GAIN
    max_invalid_fraction: float = 0.05
    horizons: Mapping[str, Mapping[str, Any]] = field(default_factory=dict)
    prc: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.method not in SWEEP_METHODS:
            raise ConfigError(f"sweep 方法不支持: {self.method}（允许: {', '.join(SWEEP_METHODS)}）")
        if int(self.grid_size) < 3:
            raise ConfigError(f"grid_size 必须 >= 3: {self.grid_size}")
        if int(self.n) < 3:
            raise ConfigError(f"sweep 需要 n >= 3: {self.n}")
        lo, hi = (float(x) for x in self.value_range)
        if not (0 < lo < hi):
            raise ConfigError(f"range 必须满足 0 < low < high: {self.value_range}")
        if not (self.epsilon >= 0):
            raise ConfigError(f"epsilon 必须 >= 0: {self.epsilon}")

    def axis(self) -> np.ndarray:
        lo, hi = self.value_range
        return np.linspace(float(lo), float(hi), int(self.grid_size))

    def lambdas(self, lam2: float, lam3: float) -> list[float]:
        return [1.0] * (int(self.n) - 2) + [float(lam2), float(lam3)]

    def system(self, lam2: float, lam3: float) -> CoupledSystemSpec:
        return CoupledSystemSpec.uniform(
            self.lambdas(lam2, lam3),
            self.epsilon,
            inverter=self.inverter,
            include_self=self.include_self,
            port_gain=self.port_gain,
        )


@dataclass(frozen=True)
class SyncSurface:
    """values[i, j] is S at (axis2[i], axis3[j])."""

    axis2: np.ndarray
    axis3: np.ndarray
    values: np.ndarray
    epsilon: Optional[float]
    n: Optional[int]
    method: Optional[str]
    seed: Optional[int] = None
    invalid_cells: int = 0

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(self.axis2), len(self.axis3)):
            raise ContractError(
                f"网格尺寸与坐标轴不一致: {values.shape} vs ({len(self.axis2)}, {len(self.axis3)})"
            )
        finite = values[np.isfinite(values)]
        if finite.size and float(finite.max()) > 1.0 + 1e-12:
            raise ContractError(f"S 不能大于 1: {float(finite.max())}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "axis2", np.asarray(self.axis2, dtype=float))
        object.__setattr__(self, "axis3", np.asarray(self.axis3, dtype=float))

    def metadata(self) -> dict[str, Any]:
        return {
            "epsilon": self.epsilon,
            "n": self.n,
            "method": self.method,
            "seed": self.seed,
            "seed_policy": SEED_POLICY,
            "invalid_cells": int(self.invalid_cells),
        }


def cell_seed(seed: int, i: int, j: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(i), int(j)]).generate_state(1)[0])


def cell_frequencies(
    settings: SweepSettings,
    lam2: float,
    lam3: float,
    seed: int,
    prc: Optional[PeriodicSignal] = None,
    waveform: Optional[PeriodicSignal] = None,
) -> np.ndarray:
    spec = settings.system(lam2, lam3)
    phases = initial_phases(spec.n, seed)
    if settings.method == "direct":
        horizon = estimate_horizon("direct", spec.lambdas, overrides=settings.horizons.get("direct"))
        traj = integrate(spec, state_from_phases(phases), horizon.t_end, horizon.dt)
        return measure_frequencies(traj, horizon.window_fraction)
    horizon = estimate_horizon("phase", spec.lambdas, overrides=settings.horizons.get("phase"))
    system = PhaseSystem.from_spec(spec, prc, waveform)
    traj = integrate_phases(system, phases, horizon.t_end, horizon.dt)
    return extract_frequencies(traj, horizon.window_fraction)


def _evaluate_cell(task: tuple) -> tuple[int, int, float, Optional[str]]:
    settings, prc, waveform, i, j, lam2, lam3 = task
    try:
        freqs = cell_frequencies(settings, lam2, lam3, cell_seed(settings.seed, i, j), prc, waveform)
    except NumericalError as exc:
        return i, j, float("nan"), f"{type(exc).__name__}: {exc}"
    return i, j, degree_of_sync(freqs), None


def sweep_surface(
    settings: SweepSettings,
    *,
    workers: Optional[int] = 1,
    prc: Optional[PrcResult] = None,
) -> SyncSurface:
    axis = settings.axis()
    signal = waveform = None
    if settings.method != "direct":
        if prc is None:
            osc = RingOscillatorSpec(1.0, settings.inverter)
            prc = extract_prc(settings.method, osc, settings.prc)
        signal, waveform = prc.signal, prc.coupling_waveform()

    tasks = [
        (settings, signal, waveform, i, j, axis[i], axis[j])
        for i, j in itertools.product(range(axis.size), range(axis.size))
    ]
    n_workers = resolve_workers(workers, tasks=len(tasks))
    if n_workers == 1:
        results = [_evaluate_cell(t) for t in tasks]
    else:
        with Pool(processes=n_workers) as pool:
            results = pool.map(_evaluate_cell, tasks)

    values = np.full((axis.size, axis.size), np.nan)
    for i, j, s, _ in results:
        values[i, j] = s
    invalid = int(np.count_nonzero(~np.isfinite(values)))
    if invalid > settings.max_invalid_fraction * values.size:
        failures = [msg for *_, msg in results if msg]
        raise SweepError(
            f"无效单元过多: {invalid}/{values.size}（首个错误: {failures[0] if failures else '-'}）",
            invalid_cells=invalid,
        )
    return SyncSurface(
        axis2=axis,
        axis3=axis.copy(),
        values=values,
        epsilon=float(settings.epsilon),
        n=int(settings.n),
        method=settings.method,
        seed=int(settings.seed),
        invalid_cells=invalid,
    )
