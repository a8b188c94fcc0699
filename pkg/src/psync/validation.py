"""Pre-flight checks on a loaded run configuration."""
from __future__ import annotations

from typing import Any, Dict, List

from psync.simulation.direct import DEFAULT_PORT_GAIN
from psync.simulation.resources import available_parallelism
from psync.waveform.ring import DEFAULT_SMOOTHING


def validate_run_config(config: Dict[str, Any], strict: bool = False) -> Dict[str, List[str]]:
    osc = config["oscillator"]
    coupling = config["coupling"]

    errors: List[str] = []
    warnings: List[str] = []
    info: List[str] = []

    meta = config.get("_meta", {})
    info.append(f"config: {meta.get('config_path') or '(内置默认值)'}")

    if osc["inverter"] == "ideal":
        for section in ("prc", "sweep"):
            if config[section]["method"] == "malkin":
                errors.append(f"{section}.method=malkin 需要 smoothed 反相器（ideal 的 Jacobian 退化）")
    elif float(osc["smoothing"]) < DEFAULT_SMOOTHING:
        warnings.append(
            f"oscillator.smoothing={osc['smoothing']} < {DEFAULT_SMOOTHING:g}: "
            "极限环与闭式波形的偏差可能超过 0.02"
        )

    if float(coupling["port_gain"]) != DEFAULT_PORT_GAIN or coupling["include_self"]:
        warnings.append(
            f"coupling.port_gain={coupling['port_gain']}, include_self={coupling['include_self']}: "
            f"偏离 0.8717 锁定频率校准值 (port_gain={DEFAULT_PORT_GAIN:g}, include_self=false)"
        )
    if float(coupling["epsilon"]) > 0.5:
        warnings.append(f"coupling.epsilon={coupling['epsilon']}: 超出弱耦合区，相位模型可能失效")

    if int(config["direct"]["steps_per_period"]) < 200:
        warnings.append("direct.steps_per_period < 200: 无法分辨反相器切换沿")
    if int(config["phase"]["steps_per_period"]) < 20:
        warnings.append("phase.steps_per_period < 20: 相位模型步长过大")

    workers = int(config["sweep"]["workers"])
    if workers > available_parallelism():
        warnings.append(f"sweep.workers={workers} 超过可用 CPU 数 {available_parallelism()}")

    if strict and warnings:
        errors.extend([f"STRICT模式视为错误: {w}" for w in warnings])
        warnings = []

    if not errors:
        info.append("配置校验通过")

    return {"errors": errors, "warnings": warnings, "info": info}
