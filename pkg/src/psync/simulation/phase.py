"""Simplified phase model of coupled oscillators.

theta_i' = lambda_i * (1 + k * Gamma(theta_i) * C_i),  C_i = sum_j g_ij * x(theta_j)

with k the node-3 coupling-port gain shared with the direct simulator.

Phases are in cycles and kept unwrapped. Gamma and x are period-1 signals at
the coupling node; they are evaluated through a flattened lookup table so a
step costs a handful of vector operations regardless of n.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from psync.errors import ConfigError, ContractError, InstabilityError
from psync.simulation.direct import DEFAULT_PORT_GAIN, CoupledSystemSpec
from psync.simulation.integrator import integrate_fixed, step_count, uniform_times
from psync.waveform.signal import PeriodicSignal

MIN_WINDOW_FRACTION = 0.25
DEFAULT_LOCK_TOL = 1e-3


@dataclass(frozen=True)
class PhaseSystem:
    lambdas: np.ndarray
    epsilon: float
    prc: PeriodicSignal
    waveform: PeriodicSignal
    include_self: bool = False
    g: Optional[np.ndarray] = None
    port_gain: float = DEFAULT_PORT_GAIN

    def __post_init__(self) -> None:
        lam = np.array(self.lambdas, dtype=float).reshape(-1)
        if lam.size < 1:
            raise ContractError("至少需要 1 个振荡器")
        if not np.all(np.isfinite(lam) & (lam > 0)):
            raise ContractError(f"lambda 必须全部 > 0: {lam.tolist()}")
        lam.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)
        if not (np.isfinite(self.epsilon) and self.epsilon >= 0):
            raise ContractError(f"epsilon 必须 >= 0: {self.epsilon}")
        if not (np.isfinite(self.port_gain) and self.port_gain > 0):
            raise ContractError(f"port_gain 必须 > 0: {self.port_gain}")
        if self.g is not None:
            g = np.array(self.g, dtype=float)
            if g.shape != (lam.size, lam.size):
                raise ContractError(f"g 必须是 {lam.size}x{lam.size} 矩阵: {g.shape}")
            g.setflags(write=False)
            object.__setattr__(self, "g", g)

    @classmethod
    def from_spec(
        cls, spec: CoupledSystemSpec, prc: PeriodicSignal, waveform: PeriodicSignal
    ) -> "PhaseSystem":
        return cls(
            lambdas=spec.lambdas,
            epsilon=spec.epsilon,
            prc=prc,
            waveform=waveform,
            include_self=spec.include_self,
            g=spec.g,
            port_gain=spec.port_gain,
        )

    @property
    def n(self) -> int:
        return int(self.lambdas.size)

    def coupling_matrix(self) -> np.ndarray:
        g = np.full((self.n, self.n), self.epsilon) if self.g is None else np.array(self.g)
        if not self.include_self:
            np.fill_diagonal(g, 0.0)
        return g


@dataclass(frozen=True)
class PhaseTrajectory:
    times: np.ndarray
    thetas: np.ndarray
    lambdas: np.ndarray
    dt: float
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return int(self.thetas.shape[1])

    @property
    def phis(self) -> np.ndarray:
        return self.thetas - self.times[:, None] * self.lambdas[None, :]


def coupling_term(system: PhaseSystem, thetas: Sequence[float], i: int) -> float:
    th = np.asarray(thetas, dtype=float)
    if th.shape != (system.n,):
        raise ContractError(f"thetas 长度必须是 {system.n}: {th.shape}")
    if not (0 <= i < system.n):
        raise ContractError(f"振荡器下标越界: {i}")
    row = system.coupling_matrix()[i]
    return float(np.dot(row, system.waveform(th)))


def _lookup_table(waveform: PeriodicSignal, prc: PeriodicSignal) -> np.ndarray:
    """Rows [x_k, x_{k+1} - x_k, G_k, G_{k+1} - G_k] on a shared grid."""
    m = max(waveform.resolution, prc.resolution)
    x = waveform.resample(m).samples
    gam = prc.resample(m).samples
    return np.stack([x, np.roll(x, -1) - x, gam, np.roll(gam, -1) - gam], axis=1)


def phase_velocity_function(system: PhaseSystem):
    table = _lookup_table(system.waveform, system.prc)
    m = table.shape[0]
    lam = system.lambdas
    eps = float(system.epsilon)
    gain = float(system.port_gain)
    uniform = system.g is None
    include_self = system.include_self
    g = None if uniform else system.coupling_matrix()

    def velocity(theta: np.ndarray) -> np.ndarray:
        x = np.mod(theta, 1.0) * m
        i = np.minimum(x.astype(np.intp), m - 1)
        w = x - i
        row = table[i]
        v = row[:, 0] + w * row[:, 1]
        gam = row[:, 2] + w * row[:, 3]
        if uniform:
            c = eps * v.sum()
            coupling = c - eps * v if not include_self else np.full_like(v, c)
        else:
            coupling = g @ v
        return lam * (1.0 + gain * gam * coupling)

    return velocity


def integrate_phases(
    system: PhaseSystem, theta0: Sequence[float], t_end: float, dt: float
) -> PhaseTrajectory:
    th0 = np.asarray(theta0, dtype=float)
    if th0.shape != (system.n,):
        raise ContractError(f"theta0 长度必须是 {system.n}: {th0.shape}")
    if not np.all(np.isfinite(th0)):
        raise ContractError("theta0 必须是有限值")
    n_steps = step_count(t_end, dt)
    velocity = phase_velocity_function(system)
    diagnostics: dict[str, Any] = {"strong_coupling": False}

    def rhs(t: float, y: np.ndarray, step: int) -> np.ndarray:
        return velocity(y)

    def guard(step: int, t: float, y: np.ndarray, dydt: np.ndarray) -> None:
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(dydt))):
            raise InstabilityError(f"相位出现非有限值 (t={t:.6g})", time=t)
        if not diagnostics["strong_coupling"] and np.any(dydt <= 0.0):
            diagnostics["strong_coupling"] = True
            diagnostics["strong_coupling_time"] = float(t)
            diagnostics.setdefault("warnings", []).append(
                f"theta' <= 0 at t={t:.6g}: 超出弱耦合假设（强耦合区）"
            )

    thetas = integrate_fixed(rhs, th0, dt, n_steps, guard=guard)
    if not np.all(np.isfinite(thetas[-1])):
        raise InstabilityError(f"相位出现非有限值 (t={n_steps * dt:.6g})", time=n_steps * dt)
    return PhaseTrajectory(
        times=uniform_times(n_steps, dt),
        thetas=thetas,
        lambdas=np.array(system.lambdas),
        dt=float(dt),
        diagnostics=diagnostics,
    )


def _slopes(times: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    tc = times - times.mean()
    yc = thetas - thetas.mean(axis=0)
    return (tc @ yc) / (tc @ tc)


def _window(traj: PhaseTrajectory, window_fraction: float) -> tuple[np.ndarray, np.ndarray]:
    if not (MIN_WINDOW_FRACTION <= window_fraction <= 1.0):
        raise ConfigError(
            f"window_fraction 必须在 [{MIN_WINDOW_FRACTION}, 1]: {window_fraction}"
        )
    start = int(np.floor((1.0 - window_fraction) * (traj.times.size - 1)))
    if traj.times.size - start < 4:
        raise ConfigError(f"频率窗口样本不足: {traj.times.size - start}")
    return traj.times[start:], traj.thetas[start:]


def extract_frequencies(traj: PhaseTrajectory, window_fraction: float = 0.5) -> np.ndarray:
    times, thetas = _window(traj, window_fraction)
    return _slopes(times, thetas)


def convergence_gap(traj: PhaseTrajectory, window_fraction: float = 0.5) -> float:
    """Largest first-half vs second-half frequency disagreement inside the window."""
    times, thetas = _window(traj, window_fraction)
    half = times.size // 2
    early = _slopes(times[:half], thetas[:half])
    late = _slopes(times[half:], thetas[half:])
    return float(np.max(np.abs(early - late)))


def detect_locking(freqs: Sequence[float], tol: float = DEFAULT_LOCK_TOL) -> bool:
    f = np.asarray(freqs, dtype=float).reshape(-1)
    if f.size == 0:
        raise ContractError("频率数组为空")
    if not tol > 0:
        raise ContractError(f"tol 必须 > 0: {tol}")
    return bool(f.max() - f.min() <= tol)
