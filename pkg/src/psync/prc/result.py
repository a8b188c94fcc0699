"""PRC container and cross-method comparison."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional, Union

import numpy as np

from psync.errors import ConfigError
from psync.waveform.ring import analytic_ppv, analytic_waveform
from psync.waveform.signal import DEFAULT_RESOLUTION, PeriodicSignal

METHODS = ("analytic", "malkin", "winfree")


@dataclass(frozen=True)
class PrcResult:
    signal: PeriodicSignal
    method: str
    diagnostics: dict[str, Any] = field(default_factory=dict)
    # Coupling-node waveform along the cycle the PRC was taken from.
    waveform: Optional[PeriodicSignal] = None

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"PRC 方法不支持: {self.method}（允许: {', '.join(METHODS)}）")

    @property
    def resolution(self) -> int:
        return self.signal.resolution

    def coupling_waveform(self) -> PeriodicSignal:
        return self.waveform if self.waveform is not None else analytic_waveform(3, self.resolution)


@dataclass(frozen=True)
class PrcComparison:
    rmse: float
    scale: float
    shift: float


def analytic_prc(node: int = 3, resolution: int = DEFAULT_RESOLUTION) -> PrcResult:
    return PrcResult(
        signal=analytic_ppv(node, resolution),
        method="analytic",
        diagnostics={"node": node},
        waveform=analytic_waveform(node, resolution),
    )


def _as_signal(x: Union[PrcResult, PeriodicSignal]) -> PeriodicSignal:
    return x.signal if isinstance(x, PrcResult) else x


def compare_prc(
    a: Union[PrcResult, PeriodicSignal],
    b: Union[PrcResult, PeriodicSignal],
    *,
    allow_scale: bool = False,
) -> PrcComparison:
    """Align `b` onto `a` by the best circular shift, optionally fit a scale, then RMSE.

    `shift` is the phase delay applied to `b`.
    """
    sa, sb = _as_signal(a), _as_signal(b)
    m = max(sa.resolution, sb.resolution)
    x = sa.resample(m).samples
    y = sb.resample(m).samples
    # xcorr[k] = sum_j x[j] * y[j - k]
    xcorr = np.fft.irfft(np.fft.rfft(x) * np.conj(np.fft.rfft(y)), n=m)
    k = int(np.argmax(xcorr))
    aligned = np.roll(y, k)
    energy = float(np.dot(y, y))
    scale = float(xcorr[k] / energy) if allow_scale and energy > 0 else 1.0
    rmse = float(np.sqrt(np.mean((x - scale * aligned) ** 2)))
    return PrcComparison(rmse=rmse, scale=scale, shift=k / m)


def prc_rmse(
    a: Union[PrcResult, PeriodicSignal],
    b: Union[PrcResult, PeriodicSignal],
    allow_scale: bool = False,
) -> float:
    return compare_prc(a, b, allow_scale=allow_scale).rmse
