from psync.analysis.bench import SpeedupReport, bench_speedup, speedup_ratio, time_trials
from psync.analysis.metrics import degree_of_sync, locking_area, surface_rmse
from psync.analysis.sweep import SweepSettings, SyncSurface, sweep_surface

__all__ = [
    "SpeedupReport",
    "SweepSettings",
    "SyncSurface",
    "bench_speedup",
    "degree_of_sync",
    "locking_area",
    "speedup_ratio",
    "surface_rmse",
    "sweep_surface",
    "time_trials",
]
