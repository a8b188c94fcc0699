"""Run configuration loader for psync.

Loads `config/psync.yaml` (or the file named by `PSYNC_CONFIG`), fills
missing keys from in-code defaults and validates every numeric field.
Precedence: CLI > ENV > file > defaults. The CLI applies its own flags on top
of the mapping returned here.
"""

from __future__ import annotations

import math
import os
from copy import deepcopy
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import yaml

from psync.errors import ConfigError
from psync.prc.result import METHODS
from psync.simulation.direct import DEFAULT_PORT_GAIN
from psync.waveform.ring import InverterMode

DEFAULT_CONFIG_PATH = Path("config/psync.yaml")

_RUN_DEFAULTS = {
    "seed": 0,
    "oscillator": {
        "inverter": "smoothed",
        "smoothing": 50.0,
    },
    "coupling": {
        "epsilon": 0.2,
        "include_self": False,
        "port_gain": DEFAULT_PORT_GAIN,
    },
    "direct": {
        "steps_per_period": 1000,
        "periods": 60,
        "window_fraction": 0.5,
        "lock_tol": 1e-3,
    },
    "phase": {
        "steps_per_period": 50,
        "periods": 200,
        "window_fraction": 0.5,
        "lock_tol": 1e-3,
    },
    "prc": {
        "method": "analytic",
        "node": 3,
        "resolution": 1024,
        "malkin": {"cycles": 4, "resolution": 1024},
        "winfree": {
            "amplitude": 0.05,
            "pulse_width": 0.01,
            "resolution": 256,
            "settle_periods": 5,
        },
    },
    "sweep": {
        "method": "analytic",
        "n": 3,
        "grid_size": 21,
        "range": [0.8, 1.2],
        "workers": 0,
        "max_invalid_fraction": 0.05,
        "lock_threshold": 1.0 - 1e-4,
    },
    "bench": {
        "n": [8],
        "trials": 100,
        "t_end": 20.0,
        "epsilon": 0.2,
        "methods": list(METHODS),
    },
}


def _read_yaml(path: Path) -> Dict[str, Any]:
    if not path.exists():
        raise ConfigError(f"配置文件不存在: {path}")
    with path.open("r", encoding="utf-8") as fh:
        try:
            data = yaml.safe_load(fh) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"YAML 解析失败: {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"配置文件必须是字典结构: {path}")
    return data


def _deep_defaults(config: Dict[str, Any], defaults: Mapping[str, Any]) -> Dict[str, Any]:
    merged = deepcopy(config)
    for key, value in defaults.items():
        if key not in merged:
            merged[key] = deepcopy(value)
            continue
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = _deep_defaults(dict(merged[key]), value)
    return merged


def _env(name: str) -> Optional[str]:
    value = os.environ.get(name)
    if value is None:
        return None
    value = value.strip()
    return value if value else None


def _get(cfg: Mapping[str, Any], dotted: str) -> Any:
    node: Any = cfg
    for part in dotted.split("."):
        if not isinstance(node, Mapping) or part not in node:
            raise ConfigError(f"缺少配置项: {dotted}")
        node = node[part]
    return node


def _number(
    cfg: Mapping[str, Any],
    dotted: str,
    *,
    minimum: Optional[float] = None,
    maximum: Optional[float] = None,
    exclusive_min: bool = False,
    integer: bool = False,
) -> float:
    raw = _get(cfg, dotted)
    if isinstance(raw, bool):
        raise ConfigError(f"{dotted} 必须是数字: {raw}")
    try:
        value = int(raw) if integer else float(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{dotted} 必须是{'整数' if integer else '数字'}: {raw}") from exc
    if integer and float(raw) != value:
        raise ConfigError(f"{dotted} 必须是整数: {raw}")
    if not math.isfinite(value):
        raise ConfigError(f"{dotted} 必须是有限值: {raw}")
    if minimum is not None:
        if exclusive_min and value <= minimum:
            raise ConfigError(f"{dotted} 必须 > {minimum}: {value}")
        if not exclusive_min and value < minimum:
            raise ConfigError(f"{dotted} 必须 >= {minimum}: {value}")
    if maximum is not None and value > maximum:
        raise ConfigError(f"{dotted} 必须 <= {maximum}: {value}")
    return value


def _bool(cfg: Mapping[str, Any], dotted: str) -> bool:
    raw = _get(cfg, dotted)
    if not isinstance(raw, bool):
        raise ConfigError(f"{dotted} 必须是 bool: {raw}")
    return raw


def _choice(cfg: Mapping[str, Any], dotted: str, allowed: tuple[str, ...]) -> str:
    raw = _get(cfg, dotted)
    if raw not in allowed:
        raise ConfigError(f"{dotted} 不支持: {raw}（允许: {', '.join(allowed)}）")
    return str(raw)


def inverter_from_config(cfg: Mapping[str, Any]) -> InverterMode:
    osc = cfg["oscillator"]
    if osc["inverter"] == "ideal":
        return InverterMode.ideal()
    return InverterMode.smoothed(float(osc["smoothing"]))


def _validate(cfg: Dict[str, Any]) -> None:
    _number(cfg, "seed", minimum=0, integer=True)

    _choice(cfg, "oscillator.inverter", ("ideal", "smoothed"))
    _number(cfg, "oscillator.smoothing", minimum=0, exclusive_min=True)

    _number(cfg, "coupling.epsilon", minimum=0)
    _bool(cfg, "coupling.include_self")
    _number(cfg, "coupling.port_gain", minimum=0, exclusive_min=True)

    for model in ("direct", "phase"):
        _number(cfg, f"{model}.steps_per_period", minimum=1, integer=True)
        _number(cfg, f"{model}.periods", minimum=0, exclusive_min=True)
        _number(cfg, f"{model}.window_fraction", minimum=0.25, maximum=1.0)
        _number(cfg, f"{model}.lock_tol", minimum=0, exclusive_min=True)

    _choice(cfg, "prc.method", METHODS)
    node = _number(cfg, "prc.node", minimum=1, maximum=3, integer=True)
    _number(cfg, "prc.resolution", minimum=8, integer=True)
    _number(cfg, "prc.malkin.cycles", minimum=2, integer=True)
    _number(cfg, "prc.malkin.resolution", minimum=64, integer=True)
    _number(cfg, "prc.winfree.amplitude", minimum=0, exclusive_min=True)
    _number(cfg, "prc.winfree.pulse_width", minimum=0, maximum=0.5, exclusive_min=True)
    _number(cfg, "prc.winfree.resolution", minimum=32, integer=True)
    _number(cfg, "prc.winfree.settle_periods", minimum=1, integer=True)
    if cfg["prc"]["method"] == "winfree" and node != 3:
        raise ConfigError("prc.node 在 winfree 方法下必须是 3")

    _choice(cfg, "sweep.method", METHODS + ("direct",))
    _number(cfg, "sweep.n", minimum=3, integer=True)
    _number(cfg, "sweep.grid_size", minimum=3, integer=True)
    _number(cfg, "sweep.workers", minimum=0, integer=True)
    _number(cfg, "sweep.max_invalid_fraction", minimum=0, maximum=1)
    _number(cfg, "sweep.lock_threshold", minimum=0, maximum=1, exclusive_min=True)
    rng = _get(cfg, "sweep.range")
    if not (isinstance(rng, (list, tuple)) and len(rng) == 2):
        raise ConfigError(f"sweep.range 必须是 [low, high]: {rng}")
    try:
        lo, hi = float(rng[0]), float(rng[1])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"sweep.range 必须是数字: {rng}") from exc
    if not (0 < lo < hi):
        raise ConfigError(f"sweep.range 必须满足 0 < low < high: {rng}")

    ns = _get(cfg, "bench.n")
    if not isinstance(ns, list) or not ns:
        raise ConfigError(f"bench.n 必须是非空整数列表: {ns}")
    for value in ns:
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise ConfigError(f"bench.n 中的值必须是 >= 1 的整数: {value}")
    _number(cfg, "bench.trials", minimum=1, integer=True)
    _number(cfg, "bench.t_end", minimum=0, exclusive_min=True)
    _number(cfg, "bench.epsilon", minimum=0)
    methods = _get(cfg, "bench.methods")
    if not isinstance(methods, list) or not methods or any(m not in METHODS for m in methods):
        raise ConfigError(f"bench.methods 必须是 {list(METHODS)} 的非空子集: {methods}")


def resolve_config_path(config_path: Optional[str | Path] = None) -> Optional[Path]:
    """CLI path, else `PSYNC_CONFIG`, else `config/psync.yaml` when it exists."""
    raw = config_path or _env("PSYNC_CONFIG")
    if raw:
        return Path(raw).expanduser().resolve()
    if DEFAULT_CONFIG_PATH.exists():
        return DEFAULT_CONFIG_PATH.resolve()
    return None


def load_run_config(config_path: Optional[str | Path] = None) -> Dict[str, Any]:
    """Load and validate the run configuration.

    Returns a normalized dict with `_meta` resolution info.
    """
    cfg_path = resolve_config_path(config_path)
    raw = _read_yaml(cfg_path) if cfg_path is not None else {}
    cfg = _deep_defaults(raw, _RUN_DEFAULTS)
    _validate(cfg)

    normalized = deepcopy(cfg)
    normalized["_meta"] = {
        "config_path": str(cfg_path) if cfg_path else None,
    }
    return normalized


def resolve_workers_setting(cli_value: Optional[int], cfg: Mapping[str, Any]) -> int:
    """Worker count: CLI > PSYNC_WORKERS > sweep.workers; 0 means available parallelism."""
    if cli_value is not None:
        return int(cli_value)
    env = _env("PSYNC_WORKERS")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"PSYNC_WORKERS 必须是整数: {env}") from exc
    return int(cfg["sweep"]["workers"])


def horizon_overrides(cfg: Mapping[str, Any], model: str) -> dict[str, Any]:
    section = cfg[model]
    return {k: section[k] for k in ("steps_per_period", "periods", "window_fraction")}
