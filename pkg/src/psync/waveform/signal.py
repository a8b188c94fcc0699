"""Period-1 signals stored as uniform samples with wrapping linear interpolation."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from psync.errors import ContractError, DataFormatError, DomainError

DEFAULT_RESOLUTION = 1024

# Phases closer than this (in sample units) to a grid point evaluate to the sample itself.
_SNAP = 1e-9

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class PeriodicSignal:
    """Samples at phases k/m, k = 0..m-1; evaluation wraps with period 1."""

    samples: np.ndarray

    def __post_init__(self) -> None:
        data = np.array(self.samples, dtype=float).reshape(-1)
        if data.size < 2:
            raise ContractError(f"PeriodicSignal 至少需要 2 个样本: {data.size}")
        if not np.all(np.isfinite(data)):
            raise DomainError("PeriodicSignal 样本必须是有限值")
        data.setflags(write=False)
        object.__setattr__(self, "samples", data)

    @property
    def resolution(self) -> int:
        return int(self.samples.size)

    def phases(self) -> np.ndarray:
        return np.arange(self.resolution) / self.resolution

    def __call__(self, phase: ArrayLike) -> ArrayLike:
        p = np.asarray(phase, dtype=float)
        if not np.all(np.isfinite(p)):
            raise DomainError(f"相位必须是有限值: {phase!r}")
        m = self.resolution
        x = np.mod(p, 1.0) * m
        nearest = np.rint(x)
        x = np.where(np.abs(x - nearest) < _SNAP, nearest, x)
        lo = np.floor(x)
        w = x - lo
        i = lo.astype(np.intp) % m
        value = self.samples[i] * (1.0 - w) + self.samples[(i + 1) % m] * w
        return float(value) if value.ndim == 0 else value

    def resample(self, resolution: int) -> "PeriodicSignal":
        if resolution == self.resolution:
            return self
        return PeriodicSignal(self(np.arange(resolution) / resolution))

    def shift(self, delta: float) -> "PeriodicSignal":
        """Signal s with s(p) = self(p - delta)."""
        return PeriodicSignal(self(self.phases() - float(delta)))

    def scaled(self, factor: float) -> "PeriodicSignal":
        return PeriodicSignal(self.samples * float(factor))

    def peak(self) -> float:
        return float(np.max(np.abs(self.samples)))


def write_signal_csv(path: Union[str, Path], signal: PeriodicSignal) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["phase", "value"])
        for phase, value in zip(signal.phases(), signal.samples):
            writer.writerow([repr(float(phase)), repr(float(value))])
    return out


def read_signal_csv(path: Union[str, Path]) -> PeriodicSignal:
    src = Path(path)
    if not src.exists():
        raise DataFormatError(f"文件不存在: {src}")
    with src.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["phase", "value"]:
            raise DataFormatError(f"表头必须是 phase,value: {src}", field="header")
        rows = list(reader)
    try:
        phases = np.array([float(r["phase"]) for r in rows])
        values = np.array([float(r["value"]) for r in rows])
    except (TypeError, ValueError) as exc:
        raise DataFormatError(f"无法解析数值: {src}", field="value") from exc
    if phases.size < 2:
        raise DataFormatError(f"样本数不足: {src}", field="phase")
    expected = np.arange(phases.size) / phases.size
    if not np.allclose(phases, expected, atol=1e-12):
        raise DataFormatError(f"phase 列必须是从 0 开始的均匀网格: {src}", field="phase")
    return PeriodicSignal(values)
