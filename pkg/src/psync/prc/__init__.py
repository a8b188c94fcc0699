"""PRC extraction: closed form, adjoint (Malkin) and pulse probing (Winfree)."""

from __future__ import annotations

from typing import Any, Mapping, Optional

from psync.errors import ConfigError
from psync.prc.limit_cycle import LimitCycle, compute_limit_cycle
from psync.prc.malkin import malkin_prc
from psync.prc.result import (
    METHODS,
    PrcComparison,
    PrcResult,
    analytic_prc,
    compare_prc,
    prc_rmse,
)
from psync.prc.winfree import winfree_prc
from psync.simulation.direct import RingOscillatorSpec


def extract_prc(
    method: str,
    osc: RingOscillatorSpec,
    settings: Optional[Mapping[str, Any]] = None,
) -> PrcResult:
    """Dispatch on `method` using the `prc` config section for parameters."""
    cfg = dict(settings or {})
    node = int(cfg.get("node", 3))
    if method == "analytic":
        return analytic_prc(node, int(cfg.get("resolution", 1024)))
    if method == "malkin":
        m = dict(cfg.get("malkin") or {})
        return malkin_prc(
            osc,
            cycles=int(m.get("cycles", 4)),
            resolution=int(m.get("resolution", cfg.get("resolution", 1024))),
            node=node,
        )
    if method == "winfree":
        if node != 3:
            raise ConfigError("Winfree 方法只在耦合节点 3 施加脉冲")
        w = dict(cfg.get("winfree") or {})
        return winfree_prc(
            osc,
            amplitude=float(w.get("amplitude", 0.05)),
            pulse_width=float(w.get("pulse_width", 0.01)),
            resolution=int(w.get("resolution", 256)),
            settle_periods=int(w.get("settle_periods", 5)),
        )
    raise ConfigError(f"PRC 方法不支持: {method}（允许: {', '.join(METHODS)}）")


__all__ = [
    "METHODS",
    "LimitCycle",
    "PrcComparison",
    "PrcResult",
    "analytic_prc",
    "compare_prc",
    "compute_limit_cycle",
    "extract_prc",
    "malkin_prc",
    "prc_rmse",
    "winfree_prc",
]
