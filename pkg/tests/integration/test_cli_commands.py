import json
import os
import subprocess
import sys
import tempfile
import unittest
from pathlib import Path

ROOT = Path(__file__).resolve().parents[2]
FIXTURE = ROOT / "tests" / "fixtures" / "minimal" / "config" / "psync.yaml"
DEFAULTS = ROOT / "config" / "psync.yaml"


class CliIntegrationTests(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def _run(self, *args: str) -> subprocess.CompletedProcess:
        env = {**os.environ, **{"PYTHONPATH": str(ROOT / "src")}}
        env.pop("PSYNC_CONFIG", None)
        env.pop("PSYNC_WORKERS", None)
        return subprocess.run(
            [sys.executable, "-m", "psync.cli", *args],
            cwd=ROOT,
            env=env,
            capture_output=True,
            text=True,
        )

    def _error_record(self, proc: subprocess.CompletedProcess) -> dict:
        lines = [x for x in proc.stderr.splitlines() if x.startswith("{")]
        self.assertTrue(lines, msg=proc.stdout + proc.stderr)
        return json.loads(lines[-1])

    def test_validate_command(self):
        proc = self._run("validate", "--config", str(FIXTURE))
        self.assertEqual(proc.returncode, 0, msg=proc.stdout + proc.stderr)
        self.assertIn("配置校验通过", proc.stdout + proc.stderr)

    def test_validate_rejects_malkin_on_ideal_inverter(self):
        cfg = self.tmp / "psync.yaml"
        cfg.write_text("oscillator:\n  inverter: ideal\nprc:\n  method: malkin\n", encoding="utf-8")
        proc = self._run("validate", "--config", str(cfg))
        self.assertEqual(proc.returncode, 2, msg=proc.stdout + proc.stderr)
        self.assertIn("ERROR", proc.stdout)

    def test_cli_help_lists_commands(self):
        proc = self._run("--help")
        self.assertEqual(proc.returncode, 0, msg=proc.stdout + proc.stderr)
        for cmd in ("validate", "prc", "simulate", "sweep", "compare", "bench"):
            self.assertIn(cmd, proc.stdout)

    def test_unknown_prc_method_is_usage_error(self):
        proc = self._run("prc", "--method", "spectral")
        self.assertEqual(proc.returncode, 2)

    def test_prc_analytic_writes_csv_and_sidecar(self):
        out = self.tmp / "prc.csv"
        proc = self._run("prc", "--config", str(FIXTURE), "--method", "analytic", "--output", str(out))
        self.assertEqual(proc.returncode, 0, msg=proc.stdout + proc.stderr)
        lines = out.read_text(encoding="utf-8").splitlines()
        self.assertEqual(lines[0], "phase,value")
        self.assertEqual(len(lines), 257)
        meta = json.loads((self.tmp / "prc.json").read_text(encoding="utf-8"))
        self.assertEqual(meta["method"], "analytic")

    def test_simulate_phase_locks_and_prints_record(self):
        proc = self._run(
            "simulate", "--config", str(DEFAULTS), "--seed", "0",
            "--lambda", "1,0.95,1.05", "--epsilon", "0.4",
        )
        self.assertEqual(proc.returncode, 0, msg=proc.stdout + proc.stderr)
        record = json.loads(proc.stdout)
        self.assertTrue(record["locked"])
        self.assertEqual(record["model"], "phase")
        self.assertEqual(record["method"], "analytic")
        for f in record["frequencies"]:
            self.assertAlmostEqual(f, 0.8717, delta=0.02)
        self.assertLessEqual(record["diagnostics"]["degree_of_sync"], 1.0)

    def test_simulate_phase_unlocked(self):
        proc = self._run(
            "simulate", "--config", str(DEFAULTS), "--seed", "0",
            "--lambda", "1,0.95,1.05", "--epsilon", "0.2",
        )
        self.assertEqual(proc.returncode, 0, msg=proc.stdout + proc.stderr)
        self.assertFalse(json.loads(proc.stdout)["locked"])

    def test_simulate_with_saved_prc_file(self):
        prc = self.tmp / "prc.csv"
        self._run("prc", "--config", str(FIXTURE), "--method", "analytic", "--output", str(prc))
        proc = self._run(
            "simulate", "--config", str(FIXTURE), "--lambda", "1,1",
            "--prc-file", str(prc), "--theta0", "0.1,0.2", "--t-end", "10",
        )
        self.assertEqual(proc.returncode, 0, msg=proc.stdout + proc.stderr)
        record = json.loads(proc.stdout)
        self.assertEqual(record["diagnostics"]["initial_state"], "given")

    def test_simulate_direct_single_ring(self):
        proc = self._run(
            "simulate", "--config", str(FIXTURE), "--model", "direct",
            "--lambda", "1", "--epsilon", "0", "--t-end", "12",
        )
        self.assertEqual(proc.returncode, 0, msg=proc.stdout + proc.stderr)
        record = json.loads(proc.stdout)
        self.assertAlmostEqual(record["frequencies"][0], 1.0, delta=0.02)
        self.assertEqual(record["method"], "direct")

    def test_simulate_output_is_reproducible(self):
        outputs = []
        for name in ("a.json", "b.json"):
            out = self.tmp / name
            proc = self._run(
                "simulate", "--config", str(FIXTURE), "--lambda", "1,0.95,1.05",
                "--t-end", "20", "--format", "json", "--output", str(out),
            )
            self.assertEqual(proc.returncode, 0, msg=proc.stdout + proc.stderr)
            outputs.append(out.read_bytes())
        self.assertEqual(outputs[0], outputs[1])

    def test_simulate_trajectory_csv(self):
        out = self.tmp / "traj.csv"
        proc = self._run(
            "simulate", "--config", str(FIXTURE), "--lambda", "1,1.1",
            "--t-end", "5", "--stride", "10", "--output", str(out),
        )
        self.assertEqual(proc.returncode, 0, msg=proc.stdout + proc.stderr)
        self.assertTrue(out.read_text(encoding="utf-8").startswith("time,theta_1,theta_2\n"))
        self.assertIn("locked", json.loads((self.tmp / "traj.json").read_text(encoding="utf-8")))

    def test_blow_up_reports_numerical_failure(self):
        proc = self._run(
            "simulate", "--config", str(FIXTURE), "--model", "direct",
            "--lambda", "1,1", "--epsilon", "50", "--t-end", "1",
        )
        self.assertEqual(proc.returncode, 4, msg=proc.stdout + proc.stderr)
        record = self._error_record(proc)
        self.assertEqual(record["error"], "InstabilityError")
        self.assertIn("time", record)

    def test_theta0_length_is_checked(self):
        proc = self._run("simulate", "--config", str(FIXTURE), "--lambda", "1,1", "--theta0", "0.1")
        self.assertEqual(proc.returncode, 2, msg=proc.stdout + proc.stderr)

    def test_sweep_then_compare(self):
        out = self.tmp / "surface.csv"
        proc = self._run(
            "sweep", "--config", str(FIXTURE), "--epsilon", "0",
            "--grid-size", "3", "--workers", "1", "--output", str(out),
        )
        self.assertEqual(proc.returncode, 0, msg=proc.stdout + proc.stderr)
        self.assertIn("locking_area: 0.111111", proc.stdout)
        rows = out.read_text(encoding="utf-8").splitlines()
        self.assertEqual(rows[0], "lambda2,lambda3,S")
        self.assertEqual(len(rows), 10)

        proc = self._run("compare", str(out), str(out))
        self.assertEqual(proc.returncode, 0, msg=proc.stdout + proc.stderr)
        self.assertIn("rmse: 0", proc.stdout)

    def test_compare_malformed_surface(self):
        bad = self.tmp / "bad.csv"
        bad.write_text("x,y\n1,2\n", encoding="utf-8")
        proc = self._run("compare", str(bad), str(bad))
        self.assertEqual(proc.returncode, 3, msg=proc.stdout + proc.stderr)
        record = self._error_record(proc)
        self.assertEqual(record["error"], "DataFormatError")
        self.assertEqual(record["field"], "header")

    def _grid_csv(self, name: str, axis2, axis3) -> Path:
        path = self.tmp / name
        rows = ["lambda2,lambda3,S"]
        rows += [f"{a},{b},0.5" for a in axis2 for b in axis3]
        path.write_text("\n".join(rows) + "\n", encoding="utf-8")
        return path

    def test_compare_mismatched_grids(self):
        small = self._grid_csv("small.csv", [0.9, 1.1], [0.9, 1.1])
        large = self._grid_csv("large.csv", [0.9, 1.0, 1.1], [0.9, 1.0, 1.1])
        proc = self._run("compare", str(small), str(large))
        self.assertEqual(proc.returncode, 3, msg=proc.stdout + proc.stderr)
        record = self._error_record(proc)
        self.assertEqual(record["error"], "DataFormatError")
        self.assertEqual(record["field"], "lambda2")

        shifted = self._grid_csv("shifted.csv", [0.9, 1.1], [0.8, 1.2])
        proc = self._run("compare", str(small), str(shifted))
        self.assertEqual(proc.returncode, 3, msg=proc.stdout + proc.stderr)
        self.assertEqual(self._error_record(proc)["field"], "lambda3")

    def test_port_gain_flag_is_validated(self):
        proc = self._run(
            "simulate", "--config", str(FIXTURE), "--lambda", "1,1", "--port-gain", "0",
        )
        self.assertEqual(proc.returncode, 2, msg=proc.stdout + proc.stderr)
        self.assertEqual(self._error_record(proc)["error"], "ConfigError")

    def test_bench_small(self):
        out = self.tmp / "bench.json"
        proc = self._run(
            "bench", "--config", str(FIXTURE), "--n", "2", "--trials", "1",
            "--t-end", "2", "--methods", "analytic", "--output", str(out),
        )
        self.assertEqual(proc.returncode, 0, msg=proc.stdout + proc.stderr)
        data = json.loads(out.read_text(encoding="utf-8"))
        self.assertEqual(data["reports"][0]["n"], 2)
        self.assertIn("analytic", data["reports"][0]["speedups"])

    def test_log_dir_appends_audit_line(self):
        logs = self.tmp / "logs"
        proc = self._run("validate", "--config", str(FIXTURE), "--log-dir", str(logs))
        self.assertEqual(proc.returncode, 0, msg=proc.stdout + proc.stderr)
        lines = (logs / "psync.validate.jsonl").read_text(encoding="utf-8").splitlines()
        self.assertEqual(len(lines), 1)
        entry = json.loads(lines[0])
        self.assertEqual(entry["command"], "validate")
        self.assertEqual(entry["returncode"], 0)


if __name__ == "__main__":
    unittest.main()
