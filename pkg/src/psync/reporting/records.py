"""CSV/JSON writers and readers for every artifact the CLI produces.

Files carry no timestamps, so identical runs produce identical bytes.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, List, Mapping, Sequence, Union

import numpy as np

from psync.analysis.bench import SpeedupReport
from psync.analysis.sweep import SyncSurface
from psync.errors import DataFormatError
from psync.prc.result import PrcResult
from psync.simulation.direct import Trajectory
from psync.simulation.phase import PhaseTrajectory
from psync.waveform.signal import PeriodicSignal, read_signal_csv, write_signal_csv

PathLike = Union[str, Path]
FORMATS = ("csv", "json")

_SURFACE_HEADER = ["lambda2", "lambda3", "S"]


def _jsonable(value: Any) -> Any:
    if isinstance(value, Mapping):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.generic):
        return _jsonable(value.item())
    if isinstance(value, PeriodicSignal):
        return _jsonable(value.samples)
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def dumps(payload: Mapping[str, Any]) -> str:
    return json.dumps(_jsonable(payload), ensure_ascii=False, indent=2, allow_nan=False) + "\n"


def dumps_line(payload: Mapping[str, Any]) -> str:
    return json.dumps(_jsonable(payload), ensure_ascii=False, allow_nan=False)


def write_json(path: PathLike, payload: Mapping[str, Any]) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(dumps(payload), encoding="utf-8")
    return out


def read_json(path: PathLike) -> dict:
    src = Path(path)
    if not src.exists():
        raise DataFormatError(f"文件不存在: {src}")
    try:
        data = json.loads(src.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"JSON 解析失败: {src}: {exc}") from exc
    if not isinstance(data, dict):
        raise DataFormatError(f"JSON 顶层必须是对象: {src}")
    return data


def _require(data: Mapping[str, Any], key: str, src: Path) -> Any:
    if key not in data:
        raise DataFormatError(f"缺少字段 {key}: {src}", field=key)
    return data[key]


def _is_json(path: Path) -> bool:
    if path.suffix.lower() == ".json":
        return True
    if path.suffix.lower() == ".csv":
        return False
    with path.open("r", encoding="utf-8") as fh:
        return fh.read(1) == "{"


def _writer_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(x)) for x in row])
    return path


def sidecar_path(path: PathLike) -> Path:
    return Path(path).with_suffix(".json")


# --- simulation results --------------------------------------------------------------


def result_record(
    *,
    model: str,
    method: str,
    lambdas: Sequence[float],
    epsilon: float,
    frequencies: Sequence[float],
    locked: bool,
    seed: int,
    dt: float,
    t_end: float,
    include_self: bool,
    diagnostics: Mapping[str, Any] | None = None,
) -> dict[str, Any]:
    """Result schema shared by the direct and phase models."""
    return {
        "model": model,
        "method": method,
        "n": len(lambdas),
        "epsilon": float(epsilon),
        "lambda": [float(x) for x in lambdas],
        "frequencies": [float(x) for x in frequencies],
        "locked": bool(locked),
        "seed": int(seed),
        "dt": float(dt),
        "t_end": float(t_end),
        "include_self": bool(include_self),
        "diagnostics": dict(diagnostics or {}),
    }


def write_trajectory_csv(
    path: PathLike, traj: Union[Trajectory, PhaseTrajectory], *, stride: int = 1
) -> Path:
    stride = max(1, int(stride))
    if isinstance(traj, PhaseTrajectory):
        header = ["time"] + [f"theta_{i + 1}" for i in range(traj.n)]
        data = traj.thetas
    else:
        header = ["time"] + [f"v{i + 1}_{k}" for i in range(traj.n) for k in (1, 2, 3)]
        data = traj.states
    rows = np.column_stack([traj.times, data])[::stride]
    return _writer_rows(Path(path), header, rows)


# --- PRC ------------------------------------------------------------------------------


def write_prc(path: PathLike, result: PrcResult, *, fmt: str = "csv") -> List[Path]:
    """CSV plus a JSON sidecar, or a single JSON document."""
    meta = {
        "method": result.method,
        "resolution": result.resolution,
        "diagnostics": result.diagnostics,
        "waveform": result.waveform,
    }
    out = Path(path)
    if fmt == "json":
        payload = {**meta, "phase": result.signal.phases(), "value": result.signal.samples}
        return [write_json(out, payload)]
    return [write_signal_csv(out, result.signal), write_json(sidecar_path(out), meta)]


def _prc_from_meta(meta: Mapping[str, Any], signal: PeriodicSignal, src: Path) -> PrcResult:
    method = _require(meta, "method", src)
    waveform = meta.get("waveform")
    try:
        return PrcResult(
            signal=signal,
            method=str(method),
            diagnostics=dict(meta.get("diagnostics") or {}),
            waveform=PeriodicSignal(waveform) if waveform else None,
        )
    except ValueError as exc:
        raise DataFormatError(f"PRC 记录无效: {src}: {exc}", field="method") from exc


def read_prc(path: PathLike) -> PrcResult:
    src = Path(path)
    if not src.exists():
        raise DataFormatError(f"文件不存在: {src}")
    if _is_json(src):
        data = read_json(src)
        values = _require(data, "value", src)
        try:
            signal = PeriodicSignal(values)
        except (TypeError, ValueError) as exc:
            raise DataFormatError(f"value 字段无效: {src}", field="value") from exc
        return _prc_from_meta(data, signal, src)
    signal = read_signal_csv(src)
    side = sidecar_path(src)
    meta = read_json(side) if side.exists() else {"method": "analytic"}
    return _prc_from_meta(meta, signal, side)


# --- sync surfaces --------------------------------------------------------------------


def write_surface(path: PathLike, surface: SyncSurface, *, fmt: str = "csv") -> Path:
    out = Path(path)
    if fmt == "json":
        return write_json(
            out,
            {
                "axes": {"lambda2": surface.axis2, "lambda3": surface.axis3},
                "values": surface.values,
                "metadata": surface.metadata(),
            },
        )
    rows = (
        (a2, a3, surface.values[i, j])
        for i, a2 in enumerate(surface.axis2)
        for j, a3 in enumerate(surface.axis3)
    )
    return _writer_rows(out, _SURFACE_HEADER, rows)


def _surface_from_json(src: Path) -> SyncSurface:
    data = read_json(src)
    axes = _require(data, "axes", src)
    if not isinstance(axes, Mapping):
        raise DataFormatError(f"axes 必须是对象: {src}", field="axes")
    axis2 = _require(axes, "lambda2", src)
    axis3 = _require(axes, "lambda3", src)
    raw = _require(data, "values", src)
    meta = data.get("metadata") or {}
    try:
        values = np.array(
            [[np.nan if v is None else float(v) for v in row] for row in raw], dtype=float
        )
        return SyncSurface(
            axis2=np.array(axis2, dtype=float),
            axis3=np.array(axis3, dtype=float),
            values=values,
            epsilon=None if meta.get("epsilon") is None else float(meta["epsilon"]),
            n=meta.get("n"),
            method=meta.get("method"),
            seed=meta.get("seed"),
            invalid_cells=int(meta.get("invalid_cells") or 0),
        )
    except (TypeError, ValueError) as exc:
        raise DataFormatError(f"曲面数据无效: {src}: {exc}", field="values") from exc


def _surface_from_csv(src: Path) -> SyncSurface:
    with src.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != _SURFACE_HEADER:
            raise DataFormatError(f"表头必须是 {','.join(_SURFACE_HEADER)}: {src}", field="header")
        try:
            rows = [(float(r["lambda2"]), float(r["lambda3"]), float(r["S"])) for r in reader]
        except (TypeError, ValueError) as exc:
            raise DataFormatError(f"无法解析数值: {src}", field="S") from exc
    axis2 = list(dict.fromkeys(r[0] for r in rows))
    axis3 = list(dict.fromkeys(r[1] for r in rows))
    if len(rows) != len(axis2) * len(axis3) or not rows:
        raise DataFormatError(f"行数与网格不一致: {src}", field="lambda3")
    values = np.array([r[2] for r in rows], dtype=float).reshape(len(axis2), len(axis3))
    try:
        return SyncSurface(
            axis2=np.array(axis2),
            axis3=np.array(axis3),
            values=values,
            epsilon=None,
            n=None,
            method=None,
            invalid_cells=int(np.count_nonzero(~np.isfinite(values))),
        )
    except ValueError as exc:
        raise DataFormatError(f"曲面数据无效: {src}: {exc}", field="S") from exc


def read_surface(path: PathLike) -> SyncSurface:
    src = Path(path)
    if not src.exists():
        raise DataFormatError(f"文件不存在: {src}")
    return _surface_from_json(src) if _is_json(src) else _surface_from_csv(src)


# --- speedup reports ------------------------------------------------------------------


def write_reports(path: PathLike, reports: Sequence[SpeedupReport]) -> Path:
    return write_json(path, {"reports": [r.as_dict() for r in reports]})


def read_reports(path: PathLike) -> List[SpeedupReport]:
    src = Path(path)
    data = read_json(src)
    entries = _require(data, "reports", src)
    if not isinstance(entries, list):
        raise DataFormatError(f"reports 必须是列表: {src}", field="reports")
    out = []
    for entry in entries:
        try:
            out.append(
                SpeedupReport(
                    n=int(entry["n"]),
                    trials=int(entry["trials"]),
                    t_end=float(entry["t_end"]),
                    timings={k: dict(v) for k, v in entry["timings"].items()},
                    speedups={k: float(v) for k, v in entry["speedups"].items()},
                    lambdas=list(entry.get("lambda") or []),
                    seed=int(entry.get("seed") or 0),
                )
            )
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise DataFormatError(f"报告记录无效: {src}: {exc}", field="reports") from exc
    return out
