"""Synchronization metrics over frequency vectors and surfaces."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from psync.errors import ContractError

DEFAULT_LOCK_THRESHOLD = 1.0 - 1e-4


def degree_of_sync(freqs: Sequence[float]) -> float:
    """1 - sum_k (f_k - f_1)^2, with the first oscillator as reference."""
    f = np.asarray(freqs, dtype=float).reshape(-1)
    if f.size < 2:
        raise ContractError(f"至少需要 2 个频率: {f.size}")
    return float(1.0 - np.sum((f[1:] - f[0]) ** 2))


def surface_rmse(a, b) -> float:
    """RMS of cellwise S differences over cells valid in both surfaces."""
    if a.values.shape != b.values.shape:
        raise ContractError(f"网格尺寸不一致: {a.values.shape} vs {b.values.shape}")
    if not (np.allclose(a.axis2, b.axis2, atol=1e-12) and np.allclose(a.axis3, b.axis3, atol=1e-12)):
        raise ContractError("扫描坐标轴不一致")
    if a.epsilon is not None and b.epsilon is not None and not np.isclose(a.epsilon, b.epsilon):
        raise ContractError(f"epsilon 不一致: {a.epsilon} vs {b.epsilon}")
    valid = np.isfinite(a.values) & np.isfinite(b.values)
    if not np.any(valid):
        raise ContractError("两个曲面没有共同的有效单元")
    diff = a.values[valid] - b.values[valid]
    return float(np.sqrt(np.mean(diff * diff)))


def locking_area(surface, threshold: float = DEFAULT_LOCK_THRESHOLD) -> float:
    if not (0.0 < threshold < 1.0):
        raise ContractError(f"threshold 必须在 (0, 1): {threshold}")
    valid = np.isfinite(surface.values)
    if not np.any(valid):
        return 0.0
    return float(np.count_nonzero(surface.values[valid] >= threshold) / np.count_nonzero(valid))
