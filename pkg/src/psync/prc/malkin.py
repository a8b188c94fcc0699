"""PRC by backward integration of the adjoint linearization along the limit cycle."""

from __future__ import annotations

from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from psync.errors import ConfigError, ConvergenceError, UnsupportedConfigurationError
from psync.prc.limit_cycle import LimitCycle, compute_limit_cycle
from psync.prc.result import PrcResult
from psync.simulation.direct import RingOscillatorSpec, ring_jacobian
from psync.waveform.signal import DEFAULT_RESOLUTION, PeriodicSignal

MIN_CYCLES = 2
MIN_RESOLUTION = 64
MAX_PERIODICITY_RESIDUAL = 0.05


def adjoint_cycle(cycle: LimitCycle, *, cycles: int, resolution: int) -> tuple[np.ndarray, float]:
    """Adjoint solution on the last backward cycle sampled at phases k/resolution.

    Returns (Q with shape (resolution, 3), periodicity residual relative to the
    node-3 peak). Q is not normalized.
    """
    osc = cycle.osc
    period = cycle.period
    rate = osc.rate
    mode = osc.inverter

    def rhs(t: float, q: np.ndarray) -> np.ndarray:
        x = cycle.solution(np.mod(t, period))
        return -ring_jacobian(x, rate, mode).T @ q

    sol = solve_ivp(
        rhs, (cycles * period, 0.0), np.ones(3),
        method="DOP853", rtol=1e-9, atol=1e-12, dense_output=True,
        max_step=period / 200.0,
    )
    phases = np.arange(resolution) / resolution
    q = sol.sol(cycle.time_of(phases)).T
    q_start = sol.sol(0.0)
    q_end = sol.sol(period)
    peak = float(np.max(np.abs(q[:, 2])))
    residual = float(np.max(np.abs(q_start - q_end)) / peak) if peak > 0 else float("inf")
    return q, residual


def malkin_prc(
    osc: RingOscillatorSpec,
    cycles: int = 4,
    resolution: int = DEFAULT_RESOLUTION,
    *,
    node: int = 3,
    cycle: Optional[LimitCycle] = None,
) -> PrcResult:
    if not osc.inverter.is_smooth:
        raise UnsupportedConfigurationError("Malkin 方法需要平滑反相器（ideal 模式的 Jacobian 退化）")
    if int(cycles) < MIN_CYCLES:
        raise ConfigError(f"cycles 必须 >= {MIN_CYCLES}: {cycles}")
    if int(resolution) < MIN_RESOLUTION:
        raise ConfigError(f"resolution 必须 >= {MIN_RESOLUTION}: {resolution}")
    if node not in (1, 2, 3):
        raise ConfigError(f"node 必须是 1、2 或 3: {node}")

    cycle = cycle or compute_limit_cycle(osc)
    q, residual = adjoint_cycle(cycle, cycles=int(cycles), resolution=int(resolution))
    if residual > MAX_PERIODICITY_RESIDUAL:
        raise ConvergenceError(f"伴随解未收敛为周期解: residual={residual:.3g}", residual=residual)

    phases = np.arange(resolution) / resolution
    xdot = cycle.velocities(phases)
    # Z . xdot = 1 / period, i.e. phase measured in cycles.
    norm = float(np.mean(np.sum(q * xdot, axis=1))) * cycle.period
    z = q / norm

    components = {str(k + 1): z[:, k].tolist() for k in range(3)}
    return PrcResult(
        signal=PeriodicSignal(z[:, node - 1]),
        method="malkin",
        diagnostics={
            "node": node,
            "cycles": int(cycles),
            "period": cycle.period,
            "periodicity_residual": residual,
            "normalization": norm,
            "components": components,
        },
        waveform=cycle.waveform(node, int(resolution)),
    )
