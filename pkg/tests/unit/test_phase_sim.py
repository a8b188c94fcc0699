import sys
import unittest
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[2]
SRC = ROOT / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))

from psync.errors import ConfigError, ContractError
from psync.prc.result import analytic_prc
from psync.simulation.direct import (
    DEFAULT_PORT_GAIN,
    CoupledSystemSpec,
    initial_phases,
    integrate,
    measure_frequencies,
    state_from_phases,
)
from psync.simulation.phase import (
    PhaseSystem,
    convergence_gap,
    coupling_term,
    detect_locking,
    extract_frequencies,
    integrate_phases,
    phase_velocity_function,
)
from psync.simulation.resources import estimate_horizon

SPREAD_LAMBDAS = [1.0, 0.95, 1.05]


def _system(lambdas, epsilon, *, include_self=False, g=None, port_gain=DEFAULT_PORT_GAIN):
    prc = analytic_prc(3, 1024)
    return PhaseSystem(
        lambdas=np.array(lambdas, dtype=float),
        epsilon=epsilon,
        prc=prc.signal,
        waveform=prc.coupling_waveform(),
        include_self=include_self,
        g=g,
        port_gain=port_gain,
    )


def _run(lambdas, epsilon, theta0, **kwargs):
    system = _system(lambdas, epsilon, **kwargs)
    horizon = estimate_horizon("phase", system.lambdas)
    traj = integrate_phases(system, theta0, horizon.t_end, horizon.dt)
    return traj, extract_frequencies(traj, horizon.window_fraction)


class CouplingTermTests(unittest.TestCase):
    def test_zero_coupling(self):
        system = _system([1.0, 1.0, 1.0], 0.0)
        self.assertEqual(coupling_term(system, [0.1, 0.4, 0.7], 1), 0.0)

    def test_single_oscillator_without_self(self):
        system = _system([1.0], 0.3, include_self=False)
        self.assertEqual(coupling_term(system, [0.42], 0), 0.0)

    def test_pair_without_self_reads_the_other_waveform(self):
        system = _system([1.0, 1.0], 0.3, include_self=False)
        self.assertAlmostEqual(coupling_term(system, [0.0, 0.5], 0), 0.3 * system.waveform(0.5))
        self.assertAlmostEqual(coupling_term(system, [0.0, 0.25], 0), 0.3 * system.waveform(0.25))
        self.assertNotEqual(coupling_term(system, [0.0, 0.25], 0), 0.0)

    def test_self_term_when_requested(self):
        system = _system([1.0, 1.0], 0.3, include_self=True)
        expected = 0.3 * (system.waveform(0.1) + system.waveform(0.6))
        self.assertAlmostEqual(coupling_term(system, [0.1, 0.6], 1), expected)

    def test_bad_index_and_length(self):
        system = _system([1.0, 1.0], 0.3)
        with self.assertRaises(ContractError):
            coupling_term(system, [0.0, 0.1], 2)
        with self.assertRaises(ContractError):
            coupling_term(system, [0.0], 0)


class PhaseIntegrationTests(unittest.TestCase):
    def test_uncoupled_phases_advance_exactly(self):
        theta0 = np.array([0.1, 0.2, 0.3])
        system = _system(SPREAD_LAMBDAS, 0.0)
        traj = integrate_phases(system, theta0, 50.0, 0.01)
        np.testing.assert_allclose(traj.thetas[-1], theta0 + 50.0 * np.array(SPREAD_LAMBDAS), atol=1e-9)
        np.testing.assert_allclose(extract_frequencies(traj), SPREAD_LAMBDAS, atol=1e-9)
        np.testing.assert_allclose(traj.phis[-1], theta0, atol=1e-9)

    def test_spread_case_locks_at_eps_04(self):
        _, freqs = _run(SPREAD_LAMBDAS, 0.4, initial_phases(3, 0))
        self.assertTrue(detect_locking(freqs, 1e-3))
        np.testing.assert_allclose(freqs, 0.8717, atol=0.02)

    def test_spread_case_unlocked_at_eps_02(self):
        _, freqs = _run(SPREAD_LAMBDAS, 0.2, initial_phases(3, 0))
        self.assertFalse(detect_locking(freqs, 1e-3))
        np.testing.assert_allclose(freqs, [0.9644, 0.9298, 1.0263], atol=0.03)
        self.assertLess(freqs[1], freqs[0])
        self.assertLess(freqs[0], freqs[2])
        self.assertLess(float(freqs.max() - freqs.min()), 0.10)

    def test_common_frequency_scale(self):
        theta0 = initial_phases(3, 0)
        _, base = _run(SPREAD_LAMBDAS, 0.2, theta0)
        _, scaled = _run([100.0 * x for x in SPREAD_LAMBDAS], 0.2, theta0)
        np.testing.assert_allclose(scaled / base, 100.0, rtol=1e-6)
        self.assertEqual(detect_locking(base, 1e-3), detect_locking(scaled / 100.0, 1e-3))

    def test_identical_oscillators_stay_identical(self):
        traj, _ = _run([1.0, 1.0, 1.0], 0.2, [0.3, 0.3, 0.3])
        self.assertTrue(np.array_equal(traj.thetas[:, 0], traj.thetas[:, 1]))
        self.assertTrue(np.array_equal(traj.thetas[:, 1], traj.thetas[:, 2]))

    def test_strong_coupling_is_flagged(self):
        system = _system([1.0, 1.0, 1.0], 10.0)
        traj = integrate_phases(system, [0.0, 0.3, 0.6], 5.0, 0.02)
        self.assertTrue(traj.diagnostics["strong_coupling"])
        self.assertIn("strong_coupling_time", traj.diagnostics)
        self.assertTrue(traj.diagnostics["warnings"])

    def test_weak_coupling_is_not_flagged(self):
        traj, _ = _run(SPREAD_LAMBDAS, 0.2, initial_phases(3, 0))
        self.assertFalse(traj.diagnostics["strong_coupling"])

    def test_frequencies_have_converged(self):
        traj, _ = _run(SPREAD_LAMBDAS, 0.4, initial_phases(3, 0))
        self.assertLess(convergence_gap(traj), 1e-3)

    def test_bad_inputs(self):
        system = _system([1.0, 1.0], 0.2)
        with self.assertRaises(ContractError):
            integrate_phases(system, [0.0], 1.0, 0.01)
        with self.assertRaises(ContractError):
            integrate_phases(system, [0.0, np.inf], 1.0, 0.01)
        with self.assertRaises(ContractError):
            PhaseSystem(lambdas=np.array([1.0, -1.0]), epsilon=0.1,
                        prc=system.prc, waveform=system.waveform)

    def test_window_too_short(self):
        traj = integrate_phases(_system([1.0, 1.0], 0.0), [0.0, 0.5], 1.0, 0.01)
        with self.assertRaises(ConfigError):
            extract_frequencies(traj, 0.1)
        short = integrate_phases(_system([1.0, 1.0], 0.0), [0.0, 0.5], 0.03, 0.01)
        with self.assertRaises(ConfigError):
            extract_frequencies(short, 0.5)


class PortGainTests(unittest.TestCase):
    def test_default_gain_is_shared_with_direct_model(self):
        spec = CoupledSystemSpec.uniform(SPREAD_LAMBDAS, 0.2)
        prc = analytic_prc(3, 256)
        system = PhaseSystem.from_spec(spec, prc.signal, prc.coupling_waveform())
        self.assertEqual(system.port_gain, DEFAULT_PORT_GAIN)
        self.assertEqual(system.include_self, spec.include_self)

    def test_gain_scales_like_epsilon(self):
        theta = np.array([0.1, 0.45, 0.8])
        doubled_gain = phase_velocity_function(_system(SPREAD_LAMBDAS, 0.2, port_gain=2.0))
        doubled_eps = phase_velocity_function(_system(SPREAD_LAMBDAS, 0.4, port_gain=1.0))
        np.testing.assert_allclose(doubled_gain(theta), doubled_eps(theta), rtol=1e-12)

    def test_non_positive_gain_rejected(self):
        with self.assertRaises(ContractError):
            _system([1.0, 1.0], 0.2, port_gain=0.0)


class ModelAgreementTests(unittest.TestCase):
    def test_weak_coupling_frequencies_match_direct_model(self):
        lambdas = [1.0, 0.95, 1.05]
        theta0 = initial_phases(3, 0)
        _, phase_freqs = _run(lambdas, 0.1, theta0)

        spec = CoupledSystemSpec.uniform(lambdas, 0.1)
        horizon = estimate_horizon("direct", lambdas)
        traj = integrate(spec, state_from_phases(theta0), horizon.t_end, horizon.dt)
        direct_freqs = measure_frequencies(traj, horizon.window_fraction)

        np.testing.assert_allclose(phase_freqs, direct_freqs, atol=0.02)


class LockingTests(unittest.TestCase):
    def test_examples(self):
        self.assertTrue(detect_locking([0.8717, 0.8717, 0.8717], 1e-3))
        self.assertFalse(detect_locking([0.9644, 0.9298, 1.0263], 1e-3))
        self.assertTrue(detect_locking([1.0], 1e-3))

    def test_empty(self):
        with self.assertRaises(ContractError):
            detect_locking([], 1e-3)


if __name__ == "__main__":
    unittest.main()
