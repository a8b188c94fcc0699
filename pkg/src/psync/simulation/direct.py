"""Time-domain simulation of n coupled three-inverter rings.

State layout is oscillator-major: [v1_1, v1_2, v1_3, v2_1, ...]. Coupling and
external stimuli enter through node 3 only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from psync.errors import ContractError, InstabilityError, NoOscillationError
from psync.simulation.integrator import integrate_fixed, step_count, uniform_times
from psync.waveform.ring import RING, InverterMode, analytic_state

# Input node of each stage: node 1 <- node 3, node 2 <- node 1, node 3 <- node 2.
PREV = np.array([2, 0, 1], dtype=np.intp)
COUPLING_NODE = 3
BLOW_UP = 10.0
# Coupling-port gain at node 3; the phase model applies the same factor to its
# coupling term so both simulators see one coupling strength.
DEFAULT_PORT_GAIN = 1.65


def ring_field(v: np.ndarray, rate: np.ndarray | float, mode: InverterMode) -> np.ndarray:
    """Free-running ring vector field over any leading batch shape (..., 3)."""
    return rate * (-mode.respond(v[..., PREV]) - v)


def ring_jacobian(v: np.ndarray, rate: float, mode: InverterMode) -> np.ndarray:
    jac = -rate * np.eye(3)
    slopes = mode.slope(np.asarray(v, dtype=float)[PREV])
    jac[np.arange(3), PREV] = -rate * slopes
    return jac


@dataclass(frozen=True)
class RingOscillatorSpec:
    lam: float = 1.0
    inverter: InverterMode = field(default_factory=InverterMode)

    def __post_init__(self) -> None:
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise ContractError(f"lambda 必须 > 0: {self.lam}")

    @property
    def rc(self) -> float:
        return 1.0 / (RING.gamma * self.lam)

    @property
    def rate(self) -> float:
        return RING.gamma * self.lam


@dataclass(frozen=True)
class CoupledSystemSpec:
    """n rings coupled at node 3.

    `port_gain` scales the coupling sum entering node 3; the input is also
    multiplied by the receiving ring's lambda so the whole system is invariant
    under a common frequency scale.
    """

    oscillators: tuple[RingOscillatorSpec, ...]
    epsilon: float = 0.0
    include_self: bool = False
    g: Optional[np.ndarray] = None
    port_gain: float = DEFAULT_PORT_GAIN

    def __post_init__(self) -> None:
        oscillators = tuple(self.oscillators)
        if not oscillators:
            raise ContractError("至少需要 1 个振荡器")
        object.__setattr__(self, "oscillators", oscillators)
        if not (np.isfinite(self.epsilon) and self.epsilon >= 0):
            raise ContractError(f"epsilon 必须 >= 0: {self.epsilon}")
        if not (np.isfinite(self.port_gain) and self.port_gain > 0):
            raise ContractError(f"port_gain 必须 > 0: {self.port_gain}")
        if self.g is not None:
            g = np.array(self.g, dtype=float)
            n = len(oscillators)
            if g.shape != (n, n):
                raise ContractError(f"g 必须是 {n}x{n} 矩阵: {g.shape}")
            if not np.allclose(g, g.T):
                raise ContractError("g 必须对称")
            g.setflags(write=False)
            object.__setattr__(self, "g", g)

    @classmethod
    def uniform(
        cls,
        lambdas: Sequence[float],
        epsilon: float,
        *,
        inverter: InverterMode = InverterMode(),
        include_self: bool = False,
        port_gain: float = DEFAULT_PORT_GAIN,
    ) -> "CoupledSystemSpec":
        return cls(
            oscillators=tuple(RingOscillatorSpec(float(lam), inverter) for lam in lambdas),
            epsilon=float(epsilon),
            include_self=include_self,
            port_gain=float(port_gain),
        )

    @property
    def n(self) -> int:
        return len(self.oscillators)

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([o.lam for o in self.oscillators], dtype=float)

    @property
    def rates(self) -> np.ndarray:
        return np.array([o.rate for o in self.oscillators], dtype=float)

    def coupling_matrix(self) -> np.ndarray:
        g = np.full((self.n, self.n), self.epsilon) if self.g is None else np.array(self.g)
        if not self.include_self:
            np.fill_diagonal(g, 0.0)
        return g

    def describe(self) -> dict:
        return {
            "n": self.n,
            "epsilon": self.epsilon,
            "lambda": self.lambdas.tolist(),
            "include_self": self.include_self,
            "port_gain": self.port_gain,
            "inverter": sorted({o.inverter.describe() for o in self.oscillators}),
        }


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    dt: float
    spec: CoupledSystemSpec

    def __post_init__(self) -> None:
        if self.states.shape[0] != self.times.shape[0]:
            raise ContractError("states 与 times 长度不一致")

    @property
    def n(self) -> int:
        return self.spec.n

    def voltage(self, oscillator: int, node: int = COUPLING_NODE) -> np.ndarray:
        return self.states[:, 3 * oscillator + node - 1]


def _field_function(spec: CoupledSystemSpec):
    rates = spec.rates[:, None]
    modes = [o.inverter for o in spec.oscillators]
    shared = modes[0] if all(m == modes[0] for m in modes) else None
    gain = spec.lambdas * spec.port_gain
    g = spec.coupling_matrix()
    coupled = bool(np.any(g))

    def field_of(v: np.ndarray) -> np.ndarray:
        if shared is not None:
            dv = ring_field(v, rates, shared)
        else:
            dv = np.stack([ring_field(v[i], rates[i, 0], m) for i, m in enumerate(modes)])
        if coupled:
            dv[:, 2] += gain * (g @ v[:, 2])
        return dv

    return field_of


def derivative(spec: CoupledSystemSpec, voltages: np.ndarray) -> np.ndarray:
    v = np.asarray(voltages, dtype=float)
    if v.shape != (3 * spec.n,):
        raise ContractError(f"电压向量长度必须是 {3 * spec.n}: {v.shape}")
    return _field_function(spec)(v.reshape(spec.n, 3)).reshape(-1)


def integrate(spec: CoupledSystemSpec, v0: np.ndarray, t_end: float, dt: float) -> Trajectory:
    y0 = np.asarray(v0, dtype=float)
    if y0.shape != (3 * spec.n,):
        raise ContractError(f"初始电压长度必须是 {3 * spec.n}: {y0.shape}")
    if not np.all(np.isfinite(y0)):
        raise ContractError("初始电压必须是有限值")
    n_steps = step_count(t_end, dt)
    field_of = _field_function(spec)

    def rhs(t: float, y: np.ndarray, step: int) -> np.ndarray:
        return field_of(y)

    def guard(step: int, t: float, y: np.ndarray, dydt: np.ndarray) -> None:
        if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > BLOW_UP:
            raise InstabilityError(f"状态发散 (t={t:.6g})", time=t)

    states = integrate_fixed(rhs, y0.reshape(spec.n, 3), dt, n_steps, guard=guard)
    last = states[-1]
    if not np.all(np.isfinite(last)) or np.max(np.abs(last)) > BLOW_UP:
        raise InstabilityError(f"状态发散 (t={n_steps * dt:.6g})", time=n_steps * dt)
    return Trajectory(
        times=uniform_times(n_steps, dt),
        states=states.reshape(n_steps + 1, 3 * spec.n),
        dt=float(dt),
        spec=spec,
    )


def rising_crossings(times: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Interpolated times where `values` crosses zero upwards."""
    v = np.asarray(values, dtype=float)
    t = np.asarray(times, dtype=float)
    idx = np.flatnonzero((v[:-1] < 0.0) & (v[1:] >= 0.0))
    frac = -v[idx] / (v[idx + 1] - v[idx])
    return t[idx] + frac * (t[idx + 1] - t[idx])


def trace_frequency(times: np.ndarray, values: np.ndarray) -> float:
    crossings = rising_crossings(times, values)
    if crossings.size < 2:
        raise NoOscillationError(f"上升过零点不足 2 个: {crossings.size}")
    return float((crossings.size - 1) / (crossings[-1] - crossings[0]))


def _window_start(length: int, window_fraction: float) -> int:
    if not (0.0 < window_fraction <= 1.0):
        raise ContractError(f"window_fraction 必须在 (0, 1]: {window_fraction}")
    return int(np.floor((1.0 - window_fraction) * (length - 1)))


def measure_frequencies(traj: Trajectory, window_fraction: float = 0.5) -> np.ndarray:
    start = _window_start(traj.times.size, window_fraction)
    times = traj.times[start:]
    return np.array(
        [trace_frequency(times, traj.voltage(i)[start:]) for i in range(traj.n)],
        dtype=float,
    )


def initial_phases(n: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).random(int(n))


def state_from_phases(phases: Sequence[float]) -> np.ndarray:
    return np.concatenate([analytic_state(float(p)) for p in phases])


def random_initial_state(spec: CoupledSystemSpec, seed: int) -> np.ndarray:
    return state_from_phases(initial_phases(spec.n, seed))


def is_symmetric_state(voltages: np.ndarray) -> bool:
    v = np.asarray(voltages, dtype=float)
    return bool(v.size > 0 and np.all(v == v[0]))
