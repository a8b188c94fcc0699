"""Long-running end-to-end checks. Enable with PSYNC_RUN_SLOW=1."""

import os
import sys
import unittest
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[2]
SRC = ROOT / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))

from psync.analysis.bench import bench_speedup
from psync.analysis.metrics import locking_area, surface_rmse
from psync.analysis.sweep import SweepSettings, cell_frequencies, sweep_surface
from psync.prc import analytic_prc
from psync.simulation.direct import (
    CoupledSystemSpec,
    integrate,
    measure_frequencies,
    random_initial_state,
)
from psync.simulation.phase import detect_locking
from psync.simulation.resources import estimate_horizon

RUN_SLOW = os.environ.get("PSYNC_RUN_SLOW") == "1"
SPREAD = [1.0, 0.95, 1.05]


def _direct(lambdas, epsilon, seed=0):
    spec = CoupledSystemSpec.uniform(lambdas, epsilon)
    horizon = estimate_horizon("direct", spec.lambdas)
    traj = integrate(spec, random_initial_state(spec, seed), horizon.t_end, horizon.dt)
    return measure_frequencies(traj, horizon.window_fraction)


@unittest.skipUnless(RUN_SLOW, "set PSYNC_RUN_SLOW=1 to run")
class DirectSimulationAcceptance(unittest.TestCase):
    def test_spread_rings_lock_under_strong_coupling(self):
        self.assertTrue(detect_locking(_direct(SPREAD, 0.4), 1e-3))

    def test_spread_rings_pull_but_do_not_lock(self):
        freqs = _direct(SPREAD, 0.2)
        self.assertFalse(detect_locking(freqs, 1e-3))
        self.assertLess(freqs[1], freqs[0])
        self.assertLess(freqs[0], freqs[2])
        self.assertLess(float(freqs.max() - freqs.min()), 0.10)

    def test_locked_frequency_matches_phase_model(self):
        settings = SweepSettings(epsilon=0.4)
        prc = analytic_prc(3)
        waveform = prc.coupling_waveform()
        phase = cell_frequencies(settings, 0.95, 1.05, 0, prc.signal, waveform)
        direct = cell_frequencies(SweepSettings(method="direct", epsilon=0.4), 0.95, 1.05, 0)
        self.assertTrue(detect_locking(phase, 1e-3))
        self.assertTrue(detect_locking(direct, 1e-3))
        np.testing.assert_allclose(phase, direct, atol=0.03)
        np.testing.assert_allclose(direct, 0.8717, atol=0.03)


@unittest.skipUnless(RUN_SLOW, "set PSYNC_RUN_SLOW=1 to run")
class SurfaceAcceptance(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.phase_02 = sweep_surface(SweepSettings(epsilon=0.2, grid_size=9), workers=0)
        cls.phase_04 = sweep_surface(SweepSettings(epsilon=0.4, grid_size=9), workers=0)
        cls.direct_02 = sweep_surface(
            SweepSettings(method="direct", epsilon=0.2, grid_size=9), workers=0
        )

    def test_phase_model_tracks_direct_simulation(self):
        self.assertLess(surface_rmse(self.direct_02, self.phase_02), 5e-2)

    def test_extracted_prcs_track_direct_simulation(self):
        for method in ("malkin", "winfree"):
            with self.subTest(method=method):
                surface = sweep_surface(
                    SweepSettings(method=method, epsilon=0.2, grid_size=9), workers=0
                )
                self.assertLess(surface_rmse(self.direct_02, surface), 5e-2)

    def test_locking_area_grows_with_coupling(self):
        self.assertGreater(locking_area(self.phase_04), locking_area(self.phase_02))

    def test_locking_area_grows_with_population(self):
        larger = sweep_surface(SweepSettings(epsilon=0.4, n=8, grid_size=9), workers=0)
        self.assertGreater(locking_area(larger), locking_area(self.phase_04))

    def test_surface_is_nearly_symmetric(self):
        values = self.phase_02.values
        self.assertLess(float(np.sqrt(np.nanmean((values - values.T) ** 2))), 2e-2)


@unittest.skipUnless(RUN_SLOW, "set PSYNC_RUN_SLOW=1 to run")
class SpeedupAcceptance(unittest.TestCase):
    def test_phase_model_is_at_least_ten_times_faster(self):
        report = bench_speedup(8, trials=3, t_end=20.0, methods=["analytic"])
        self.assertGreaterEqual(report.speedups["analytic"], 10.0)


if __name__ == "__main__":
    unittest.main()
