"""Unified CLI for psync."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Sequence

import numpy as np

from psync.analysis.bench import bench_speedup
from psync.analysis.metrics import degree_of_sync, locking_area, surface_rmse
from psync.analysis.sweep import SWEEP_METHODS, SweepSettings, sweep_surface
from psync.config import (
    horizon_overrides,
    inverter_from_config,
    load_run_config,
    resolve_workers_setting,
)
from psync.errors import ConfigError, DataFormatError, PsyncError
from psync.prc import METHODS, analytic_prc, compare_prc, extract_prc
from psync.prc.result import PrcResult
from psync.reporting.audit import audit_file, utc_iso, write_audit_line
from psync.reporting.records import (
    FORMATS,
    dumps,
    dumps_line,
    read_prc,
    read_surface,
    result_record,
    sidecar_path,
    write_json,
    write_prc,
    write_reports,
    write_surface,
    write_trajectory_csv,
)
from psync.simulation.direct import (
    CoupledSystemSpec,
    RingOscillatorSpec,
    initial_phases,
    integrate,
    is_symmetric_state,
    measure_frequencies,
    random_initial_state,
)
from psync.simulation.phase import (
    PhaseSystem,
    convergence_gap,
    detect_locking,
    extract_frequencies,
    integrate_phases,
)
from psync.simulation.resources import estimate_horizon
from psync.validation import validate_run_config

# Scale mismatch between an extracted PRC and the closed form worth a warning.
SCALE_WARNING = 0.1


def _float_list(text: str) -> List[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"需要逗号分隔的数字: {text}") from exc
    if not values:
        raise argparse.ArgumentTypeError(f"列表为空: {text}")
    return values


def _int_list(text: str) -> List[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"需要逗号分隔的整数: {text}") from exc
    if not values:
        raise argparse.ArgumentTypeError(f"列表为空: {text}")
    return values


def _method_list(text: str) -> List[str]:
    values = [x.strip() for x in text.split(",") if x.strip()]
    bad = [m for m in values if m not in METHODS]
    if bad or not values:
        raise argparse.ArgumentTypeError(f"PRC 方法不支持: {text}（允许: {', '.join(METHODS)}）")
    return values


def _print_validation(result: dict) -> None:
    for msg in result.get("info", []):
        print(msg)
    for msg in result.get("warnings", []):
        print(f"WARNING: {msg}")
    for msg in result.get("errors", []):
        print(f"ERROR: {msg}")


def _print_warnings(messages: Sequence[str]) -> None:
    for msg in messages:
        print(f"WARNING: {msg}")


def _load(args: argparse.Namespace) -> Dict[str, Any]:
    """Run config with the shared CLI overrides applied."""
    config = load_run_config(args.config)
    if getattr(args, "seed", None) is not None:
        if args.seed < 0:
            raise ConfigError(f"seed 必须 >= 0: {args.seed}")
        config["seed"] = int(args.seed)
    if getattr(args, "epsilon", None) is not None:
        config["coupling"]["epsilon"] = float(args.epsilon)
    if getattr(args, "include_self", None) is not None:
        config["coupling"]["include_self"] = bool(args.include_self)
    if getattr(args, "port_gain", None) is not None:
        if not args.port_gain > 0:
            raise ConfigError(f"--port-gain 必须 > 0: {args.port_gain}")
        config["coupling"]["port_gain"] = float(args.port_gain)
    if getattr(args, "inverter", None) is not None:
        config["oscillator"]["inverter"] = args.inverter
    if getattr(args, "smoothing", None) is not None:
        config["oscillator"]["smoothing"] = float(args.smoothing)
    return config


def _record_artifacts(args: argparse.Namespace, paths: Sequence[Path]) -> None:
    for p in paths:
        args.artifacts.append(str(p))
        print(f"output: {p}")


def _prc_settings(config: Dict[str, Any], args: argparse.Namespace) -> Dict[str, Any]:
    settings = json.loads(json.dumps(config["prc"]))
    if getattr(args, "node", None) is not None:
        settings["node"] = int(args.node)
    if getattr(args, "resolution", None) is not None:
        settings["resolution"] = int(args.resolution)
        settings["malkin"]["resolution"] = int(args.resolution)
        settings["winfree"]["resolution"] = int(args.resolution)
    if getattr(args, "cycles", None) is not None:
        settings["malkin"]["cycles"] = int(args.cycles)
    if getattr(args, "amplitude", None) is not None:
        settings["winfree"]["amplitude"] = float(args.amplitude)
    if getattr(args, "pulse_width", None) is not None:
        settings["winfree"]["pulse_width"] = float(args.pulse_width)
    if getattr(args, "settle_periods", None) is not None:
        settings["winfree"]["settle_periods"] = int(args.settle_periods)
    return settings


def _phase_prc(config: Dict[str, Any], args: argparse.Namespace, method: str) -> PrcResult:
    if getattr(args, "prc_file", None):
        return read_prc(args.prc_file)
    return extract_prc(
        method,
        RingOscillatorSpec(1.0, inverter_from_config(config)),
        _prc_settings(config, args),
    )


def cmd_validate(args: argparse.Namespace) -> int:
    config = load_run_config(args.config)
    result = validate_run_config(config, strict=args.strict)
    _print_validation(result)
    return ConfigError.exit_code if result["errors"] else 0


def cmd_prc(args: argparse.Namespace) -> int:
    config = _load(args)
    method = args.method or config["prc"]["method"]
    settings = _prc_settings(config, args)
    osc = RingOscillatorSpec(float(args.lam), inverter_from_config(config))
    result = extract_prc(method, osc, settings)

    print(f"method: {result.method}")
    print(f"resolution: {result.resolution}")
    print(f"peak: {result.signal.peak():.6g}")
    if method != "analytic":
        reference = analytic_prc(int(settings["node"]), result.resolution)
        unscaled = compare_prc(reference, result)
        scaled = compare_prc(reference, result, allow_scale=True)
        result.diagnostics["vs_analytic"] = {
            "rmse": unscaled.rmse,
            "scaled_rmse": scaled.rmse,
            "scale": scaled.scale,
            "shift": scaled.shift,
            "relative_scaled_rmse": scaled.rmse / reference.signal.peak(),
        }
        print(f"rmse_vs_analytic: {unscaled.rmse:.6g}")
        print(f"scaled_rmse_vs_analytic: {scaled.rmse:.6g} (scale={scaled.scale:.4f})")
        if abs(scaled.scale - 1.0) > SCALE_WARNING:
            _print_warnings([f"与闭式 PPV 存在系统性幅度差: scale={scaled.scale:.4f}"])
    for key in ("raw_shift_amplitude", "normalized_shift_amplitude", "periodicity_residual"):
        if key in result.diagnostics:
            print(f"{key}: {result.diagnostics[key]:.6g}")

    output = args.output or f"results/prc_{method}.{args.format}"
    _record_artifacts(args, write_prc(output, result, fmt=args.format))
    return 0


def _simulate_direct(
    config: Dict[str, Any], args: argparse.Namespace, spec: CoupledSystemSpec
) -> tuple[Any, Dict[str, Any], float, float]:
    horizon = estimate_horizon("direct", spec.lambdas, overrides=horizon_overrides(config, "direct"))
    dt = float(args.dt or horizon.dt)
    t_end = float(args.t_end or horizon.t_end)
    warnings: List[str] = []
    if args.v0 is not None:
        v0 = np.asarray(args.v0, dtype=float)
        if is_symmetric_state(v0):
            warnings.append("初始状态完全对称: 这是不稳定平衡点，建议使用随机初始相位")
        origin = "given"
    else:
        v0 = random_initial_state(spec, config["seed"])
        origin = "random"
    traj = integrate(spec, v0, t_end, dt)
    freqs = measure_frequencies(traj, horizon.window_fraction)
    diagnostics = {
        "initial_state": origin,
        "inverter": spec.oscillators[0].inverter.describe(),
        "port_gain": spec.port_gain,
        "lock_tol": config["direct"]["lock_tol"],
        "warnings": warnings,
    }
    locked = detect_locking(freqs, config["direct"]["lock_tol"])
    out = {"method": "direct", "frequencies": freqs, "locked": locked, "diagnostics": diagnostics}
    return traj, out, dt, t_end


def _simulate_phase(
    config: Dict[str, Any], args: argparse.Namespace, spec: CoupledSystemSpec, method: str
) -> tuple[Any, Dict[str, Any], float, float]:
    horizon = estimate_horizon("phase", spec.lambdas, overrides=horizon_overrides(config, "phase"))
    dt = float(args.dt or horizon.dt)
    t_end = float(args.t_end or horizon.t_end)
    prc = _phase_prc(config, args, method)
    system = PhaseSystem.from_spec(spec, prc.signal, prc.coupling_waveform())
    theta0 = args.theta0 if args.theta0 is not None else initial_phases(spec.n, config["seed"])
    traj = integrate_phases(system, theta0, t_end, dt)
    freqs = extract_frequencies(traj, horizon.window_fraction)
    tol = float(config["phase"]["lock_tol"])
    gap = convergence_gap(traj, horizon.window_fraction)
    diagnostics = dict(traj.diagnostics)
    diagnostics["warnings"] = list(diagnostics.get("warnings", []))
    diagnostics["convergence_gap"] = gap
    diagnostics["unconverged"] = gap > tol
    diagnostics["initial_state"] = "given" if args.theta0 is not None else "random"
    diagnostics["lock_tol"] = tol
    diagnostics["port_gain"] = system.port_gain
    if gap > tol:
        diagnostics["warnings"].append(f"前后半窗频率差 {gap:.3g} > {tol:g}: 可能尚未收敛")
    locked = detect_locking(freqs, tol)
    out = {"method": prc.method, "frequencies": freqs, "locked": locked, "diagnostics": diagnostics}
    return traj, out, dt, t_end


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _load(args)
    lambdas = args.lam
    if args.model == "direct" and args.theta0 is not None:
        raise ConfigError("--theta0 只适用于 --model phase")
    if args.model == "phase" and args.v0 is not None:
        raise ConfigError("--v0 只适用于 --model direct")
    if args.v0 is not None and len(args.v0) != 3 * len(lambdas):
        raise ConfigError(f"--v0 需要 {3 * len(lambdas)} 个值: {len(args.v0)}")
    if args.theta0 is not None and len(args.theta0) != len(lambdas):
        raise ConfigError(f"--theta0 需要 {len(lambdas)} 个值: {len(args.theta0)}")
    if args.stride < 1:
        raise ConfigError(f"--stride 必须 >= 1: {args.stride}")
    spec = CoupledSystemSpec.uniform(
        lambdas,
        config["coupling"]["epsilon"],
        inverter=inverter_from_config(config),
        include_self=config["coupling"]["include_self"],
        port_gain=float(config["coupling"]["port_gain"]),
    )
    if args.model == "direct":
        traj, out, dt, t_end = _simulate_direct(config, args, spec)
    else:
        method = args.method or config["prc"]["method"]
        traj, out, dt, t_end = _simulate_phase(config, args, spec, method)
    if spec.n >= 2:
        out["diagnostics"]["degree_of_sync"] = degree_of_sync(out["frequencies"])

    record = result_record(
        model=args.model,
        method=out["method"],
        lambdas=lambdas,
        epsilon=spec.epsilon,
        frequencies=out["frequencies"],
        locked=out["locked"],
        seed=config["seed"],
        dt=dt,
        t_end=t_end,
        include_self=spec.include_self,
        diagnostics=out["diagnostics"],
    )
    if not args.output:
        # stdout carries only the JSON record; warnings stay in its diagnostics.
        sys.stdout.write(dumps(record))
        return 0

    _print_warnings(out["diagnostics"]["warnings"])
    print("frequencies: " + ", ".join(f"{f:.6f}" for f in out["frequencies"]))
    print(f"locked: {str(out['locked']).lower()}")
    if args.format == "json":
        written = [write_json(args.output, record)]
    else:
        written = [
            write_trajectory_csv(args.output, traj, stride=args.stride),
            write_json(sidecar_path(args.output), record),
        ]
    _record_artifacts(args, written)
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _load(args)
    sweep_cfg = config["sweep"]
    method = args.method or sweep_cfg["method"]
    value_range = list(args.range or sweep_cfg["range"])
    if len(value_range) != 2:
        raise ConfigError(f"--range 需要 2 个值: {value_range}")
    settings = SweepSettings(
        method=method,
        epsilon=float(config["coupling"]["epsilon"]),
        n=int(args.n or sweep_cfg["n"]),
        grid_size=int(args.grid_size or sweep_cfg["grid_size"]),
        value_range=(float(value_range[0]), float(value_range[1])),
        seed=int(config["seed"]),
        include_self=bool(config["coupling"]["include_self"]),
        inverter=inverter_from_config(config),
        port_gain=float(config["coupling"]["port_gain"]),
        max_invalid_fraction=float(sweep_cfg["max_invalid_fraction"]),
        horizons={m: horizon_overrides(config, m) for m in ("direct", "phase")},
        prc=_prc_settings(config, args),
    )
    prc = read_prc(args.prc_file) if args.prc_file and method != "direct" else None
    workers = resolve_workers_setting(args.workers, config)
    surface = sweep_surface(settings, workers=workers, prc=prc)

    area = locking_area(surface, float(sweep_cfg["lock_threshold"]))
    print(f"method: {method}")
    print(f"grid: {surface.values.shape[0]}x{surface.values.shape[1]}")
    print(f"invalid_cells: {surface.invalid_cells}")
    print(f"locking_area: {area:.6g}")
    output = args.output or f"results/surface_{method}.{args.format}"
    _record_artifacts(args, [write_surface(output, surface, fmt=args.format)])
    return 0


def _check_comparable(a: Any, b: Any) -> None:
    for name, xa, xb in (("lambda2", a.axis2, b.axis2), ("lambda3", a.axis3, b.axis3)):
        if xa.shape != xb.shape or not np.allclose(xa, xb, atol=1e-12):
            raise DataFormatError(f"{name} 坐标轴不一致: {xa.size} vs {xb.size} 个取值", field=name)
    if a.epsilon is not None and b.epsilon is not None and not np.isclose(a.epsilon, b.epsilon):
        raise DataFormatError(f"epsilon 不一致: {a.epsilon} vs {b.epsilon}", field="epsilon")


def cmd_compare(args: argparse.Namespace) -> int:
    a = read_surface(args.a)
    b = read_surface(args.b)
    _check_comparable(a, b)
    rmse = surface_rmse(a, b)
    print(f"rmse: {rmse:.6g}")
    if args.output:
        payload = {
            "a": str(args.a),
            "b": str(args.b),
            "rmse": rmse,
            "locking_area": {"a": locking_area(a), "b": locking_area(b)},
        }
        _record_artifacts(args, [write_json(args.output, payload)])
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    config = _load(args)
    bench_cfg = config["bench"]
    ns = args.n or bench_cfg["n"]
    methods = args.methods or bench_cfg["methods"]
    trials = int(args.trials or bench_cfg["trials"])
    t_end = float(args.t_end or bench_cfg["t_end"])
    epsilon = float(args.epsilon if args.epsilon is not None else bench_cfg["epsilon"])
    inverter = inverter_from_config(config)
    port_gain = float(config["coupling"]["port_gain"])
    settings = _prc_settings(config, args)
    prcs = {m: extract_prc(m, RingOscillatorSpec(1.0, inverter), settings) for m in methods}

    reports = []
    for n in ns:
        report = bench_speedup(
            int(n),
            trials,
            t_end,
            methods,
            seed=int(config["seed"]),
            epsilon=epsilon,
            inverter=inverter,
            include_self=bool(config["coupling"]["include_self"]),
            port_gain=port_gain,
            prcs=prcs,
        )
        reports.append(report)
        ratios = ", ".join(f"{m}={r:.1f}x" for m, r in report.speedups.items())
        print(f"n={report.n}: direct={report.timings['direct']['mean']:.4g}s; {ratios}")
    output = args.output or "results/bench.json"
    _record_artifacts(args, [write_reports(output, reports)])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="psync", description="Coupled ring-oscillator synchronization CLI")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="YAML 配置（默认 $PSYNC_CONFIG 或 config/psync.yaml）")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--log-dir", default=None, help="追加 JSONL 运行日志")

    outputs = argparse.ArgumentParser(add_help=False)
    outputs.add_argument("--output", default=None)
    outputs.add_argument("--format", choices=FORMATS, default="csv")

    oscillator = argparse.ArgumentParser(add_help=False)
    oscillator.add_argument("--inverter", choices=["ideal", "smoothed"], default=None)
    oscillator.add_argument("--smoothing", type=float, default=None)

    prc_opts = argparse.ArgumentParser(add_help=False)
    prc_opts.add_argument("--node", type=int, choices=[1, 2, 3], default=None)
    prc_opts.add_argument("--resolution", type=int, default=None)
    prc_opts.add_argument("--cycles", type=int, default=None)
    prc_opts.add_argument("--amplitude", type=float, default=None)
    prc_opts.add_argument("--pulse-width", type=float, default=None)
    prc_opts.add_argument("--settle-periods", type=int, default=None)

    coupling = argparse.ArgumentParser(add_help=False)
    coupling.add_argument("--epsilon", type=float, default=None)
    coupling.add_argument("--include-self", action=argparse.BooleanOptionalAction, default=None)
    coupling.add_argument("--port-gain", type=float, default=None, help="节点 3 耦合端口增益")

    p = sub.add_parser("validate", parents=[common], help="校验运行配置")
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("prc", parents=[common, outputs, oscillator, prc_opts], help="提取 PRC/PPV")
    p.add_argument("--method", choices=METHODS, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.set_defaults(func=cmd_prc)

    p = sub.add_parser(
        "simulate", parents=[common, outputs, oscillator, prc_opts, coupling], help="直接仿真或相位模型仿真"
    )
    p.add_argument("--model", choices=["phase", "direct"], default="phase")
    p.add_argument("--method", choices=METHODS, default=None, help="相位模型使用的 PRC")
    p.add_argument("--prc-file", default=None, help="使用已保存的 PRC 文件")
    p.add_argument("--lambda", dest="lam", type=_float_list, required=True)
    p.add_argument("--t-end", type=float, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--v0", type=_float_list, default=None, help="直接仿真初始电压 (3n 个)")
    p.add_argument("--theta0", type=_float_list, default=None, help="相位模型初始相位 (n 个)")
    p.add_argument("--stride", type=int, default=1, help="轨迹 CSV 行抽取间隔")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser(
        "sweep", parents=[common, outputs, oscillator, prc_opts, coupling], help="同步度二维扫描"
    )
    p.add_argument("--method", choices=SWEEP_METHODS, default=None)
    p.add_argument("--prc-file", default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--grid-size", type=int, default=None)
    p.add_argument("--range", type=_float_list, default=None)
    p.add_argument("--workers", type=int, default=None, help="0 表示可用 CPU 数")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", parents=[common], help="比较两个同步度曲面 (RMSE)")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("bench", parents=[common, oscillator, prc_opts, coupling], help="相位模型加速比")
    p.add_argument("--n", type=_int_list, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--t-end", type=float, default=None)
    p.add_argument("--methods", type=_method_list, default=None)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    args.artifacts = []
    try:
        rc = int(args.func(args))
    except PsyncError as exc:
        rc = int(exc.exit_code)
        print(f"ERROR: {exc}")
        record: Dict[str, Any] = {"error": type(exc).__name__, "message": str(exc), "exit_code": rc}
        for attr in ("field", "time", "phase", "residual", "invalid_cells"):
            if hasattr(exc, attr):
                record[attr] = getattr(exc, attr)
        sys.stderr.write(dumps_line(record) + "\n")
    if args.log_dir:
        write_audit_line(
            audit_file(args.log_dir, args.command),
            {
                "timestamp": utc_iso(),
                "command": args.command,
                "argv": argv,
                "returncode": rc,
                "artifacts": args.artifacts,
            },
        )
    return rc


if __name__ == "__main__":
    raise SystemExit(main(sys.argv[1:]))
