"""Welch power spectral density and peak extraction."""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy import signal as sps

from gevreg.errors import ConfigError

logger = logging.getLogger(__name__)

_WINDOWS = {"hann": "hann", "rectangular": "boxcar"}
_DETREND = {"mean": "constant", "none": False}


@dataclass(frozen=True)
class PsdParams:
    """Welch estimator settings.

    Attributes:
        segment_length (int | None): Samples per segment; ``None`` picks
            ``min(len/8 rounded down to a power of two, 4096)``.
        overlap_fraction (float): Overlap of consecutive segments in [0, 1).
        window (str): "hann" or "rectangular".
        detrend (str): "mean" or "none".
    """

    segment_length: Optional[int] = None
    overlap_fraction: float = 0.5
    window: str = "hann"
    detrend: str = "mean"

    def __post_init__(self):
        if self.segment_length is not None and self.segment_length < 8:
            raise ConfigError("segment_length must be at least 8")
        if not 0.0 <= self.overlap_fraction < 1.0:
            raise ConfigError("overlap_fraction must be in [0, 1)")
        if self.window not in _WINDOWS:
            raise ConfigError(f"unknown window {self.window!r}")
        if self.detrend not in _DETREND:
            raise ConfigError(f"unknown detrend {self.detrend!r}")

    def resolve_segment(self, n_samples: int) -> int:
        if self.segment_length is not None:
            return self.segment_length
        target = max(8, n_samples // 8)
        return min(2 ** int(math.floor(math.log2(target))), 4096)


@dataclass(frozen=True)
class PsdResult:
    frequencies: np.ndarray
    power: np.ndarray
    resolution: float


def welch_psd(samples: Sequence[float], sample_interval: float, params: PsdParams = None) -> PsdResult:
    """One-sided PSD (per Hz) by averaging windowed periodograms.

    Args:
        samples (Sequence[float]): Real signal, uniformly sampled.
        sample_interval (float): Sampling interval in seconds.
        params (PsdParams, optional): Estimator settings.

    Returns:
        PsdResult: Frequencies in Hz, power per Hz and bin width.

    Raises:
        ConfigError: If the signal is shorter than one segment.
    """
    params = params or PsdParams()
    x = np.asarray(samples, dtype=float)
    if not sample_interval > 0:
        raise ConfigError("sample_interval must be positive")
    nperseg = params.resolve_segment(x.size)
    if x.size < nperseg:
        raise ConfigError(f"signal of {x.size} samples is shorter than one segment ({nperseg})")
    noverlap = int(nperseg * params.overlap_fraction)
    freqs, power = sps.welch(
        x,
        fs=1.0 / sample_interval,
        window=_WINDOWS[params.window],
        nperseg=nperseg,
        noverlap=noverlap,
        detrend=_DETREND[params.detrend],
        return_onesided=True,
        scaling="density",
    )
    power = np.clip(power, 0.0, None)
    return PsdResult(freqs, power, float(freqs[1] - freqs[0]))


@dataclass(frozen=True)
class Peak:
    frequency: float
    power: float


@dataclass(frozen=True)
class PeakSet:
    """Peaks sorted by power, strongest first."""

    peaks: List[Peak] = field(default_factory=list)

    def __post_init__(self):
        object.__setattr__(self, "peaks", sorted(self.peaks, key=lambda p: -p.power))

    def __len__(self):
        return len(self.peaks)

    def __iter__(self):
        return iter(self.peaks)

    @property
    def frequencies(self) -> List[float]:
        return [p.frequency for p in self.peaks]


def _parabolic(log_power: np.ndarray, i: int):
    """Vertex offset (in bins) and log-height of the parabola through bins i-1, i, i+1."""
    a, b, c = log_power[i - 1], log_power[i], log_power[i + 1]
    denom = a - 2.0 * b + c
    if denom == 0.0:
        return 0.0, b
    delta = 0.5 * (a - c) / denom
    return delta, b - 0.25 * (a - c) * delta


def extract_peaks(
    psd: PsdResult, max_peaks: int = 10, floor_factor: float = 10.0, min_relative_power: float = 1e-2, absolute_floor: float = 1e-24
) -> PeakSet:
    """Local maxima of the PSD above the noise floor.

    A bin is a peak when it is a strict local maximum and its power exceeds
    ``floor_factor`` times the median power, ``min_relative_power`` times the
    maximum power, and ``absolute_floor``. Frequencies are refined with a
    3-point parabola on log-power.
    """
    p = psd.power
    if p.size < 3:
        return PeakSet([])
    floor = max(floor_factor * float(np.median(p)), min_relative_power * float(np.max(p)), absolute_floor)
    interior = np.arange(1, p.size - 1)
    is_max = (p[interior] > p[interior - 1]) & (p[interior] >= p[interior + 1]) & (p[interior] > floor)
    log_p = np.log(np.maximum(p, np.finfo(float).tiny))
    peaks = []
    for i in interior[is_max]:
        delta, height = _parabolic(log_p, int(i))
        peaks.append(Peak(float(psd.frequencies[i] + delta * psd.resolution), float(math.exp(height))))
    result = PeakSet(peaks)
    logger.debug("found %d peaks above floor %.3g", len(result), floor)
    return PeakSet(result.peaks[:max_peaks])
