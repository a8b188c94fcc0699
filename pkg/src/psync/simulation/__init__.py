from psync.simulation.direct import (
    CoupledSystemSpec,
    RingOscillatorSpec,
    Trajectory,
    derivative,
    initial_phases,
    integrate,
    measure_frequencies,
    random_initial_state,
)
from psync.simulation.phase import (
    PhaseSystem,
    PhaseTrajectory,
    coupling_term,
    detect_locking,
    extract_frequencies,
    integrate_phases,
)
from psync.simulation.resources import Horizon, estimate_horizon

__all__ = [
    "CoupledSystemSpec",
    "Horizon",
    "PhaseSystem",
    "PhaseTrajectory",
    "RingOscillatorSpec",
    "Trajectory",
    "coupling_term",
    "derivative",
    "detect_locking",
    "estimate_horizon",
    "extract_frequencies",
    "initial_phases",
    "integrate",
    "integrate_phases",
    "measure_frequencies",
    "random_initial_state",
]
