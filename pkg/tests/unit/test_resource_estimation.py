import sys
import unittest
from pathlib import Path
from unittest import mock

ROOT = Path(__file__).resolve().parents[2]
SRC = ROOT / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))

from psync.errors import ConfigError
from psync.simulation.resources import (
    DEFAULT_MODEL_HORIZONS,
    estimate_horizon,
    resolve_workers,
)


class HorizonEstimationTests(unittest.TestCase):
    def test_direct_step_resolves_fastest_ring(self):
        horizon = estimate_horizon("direct", [1.0, 0.95, 1.05])
        self.assertAlmostEqual(horizon.dt, 1.0 / (1000 * 1.05))
        self.assertGreaterEqual(horizon.t_end * 0.95, DEFAULT_MODEL_HORIZONS["direct"]["periods"])

    def test_t_end_is_a_whole_number_of_steps(self):
        horizon = estimate_horizon("phase", [1.0, 0.8, 1.2])
        self.assertAlmostEqual(horizon.t_end / horizon.dt, horizon.n_steps, places=6)

    def test_common_scale_keeps_step_count(self):
        base = estimate_horizon("phase", [1.0, 0.95, 1.05])
        scaled = estimate_horizon("phase", [100.0, 95.0, 105.0])
        self.assertEqual(base.n_steps, scaled.n_steps)
        self.assertAlmostEqual(scaled.dt * 100.0, base.dt, places=12)

    def test_overrides_apply_per_key(self):
        horizon = estimate_horizon(
            "phase", [1.0], overrides={"steps_per_period": 10, "periods": 5, "window_fraction": None}
        )
        self.assertAlmostEqual(horizon.dt, 0.1)
        self.assertEqual(horizon.n_steps, 50)
        self.assertEqual(horizon.window_fraction, DEFAULT_MODEL_HORIZONS["phase"]["window_fraction"])

    def test_unparseable_override_falls_back(self):
        horizon = estimate_horizon("direct", [1.0], overrides={"steps_per_period": "many"})
        self.assertAlmostEqual(horizon.dt, 1e-3)

    def test_unknown_model_is_config_error(self):
        with self.assertRaises(ConfigError) as ctx:
            estimate_horizon("spice", [1.0])
        self.assertEqual(ctx.exception.exit_code, 2)


class WorkerResolutionTests(unittest.TestCase):
    def test_zero_means_available_parallelism(self):
        with mock.patch("psync.simulation.resources.available_parallelism", return_value=6):
            self.assertEqual(resolve_workers(0, tasks=100), 6)
            self.assertEqual(resolve_workers(None, tasks=100), 6)

    def test_never_more_than_tasks(self):
        self.assertEqual(resolve_workers(16, tasks=4), 4)
        self.assertEqual(resolve_workers(3, tasks=0), 1)


if __name__ == "__main__":
    unittest.main()
