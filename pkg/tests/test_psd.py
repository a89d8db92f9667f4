import numpy as np
import pytest

from gevreg.errors import ConfigError
from gevreg.spectra.psd import PsdParams, extract_peaks, welch_psd


def test_resolve_segment():
    params = PsdParams()
    assert params.resolve_segment(1024) == 128
    assert params.resolve_segment(16384) == 2048
    assert params.resolve_segment(100000) == 4096
    assert PsdParams(segment_length=64).resolve_segment(100000) == 64


def test_params_validation():
    with pytest.raises(ConfigError):
        PsdParams(segment_length=4)
    with pytest.raises(ConfigError):
        PsdParams(overlap_fraction=1.0)
    with pytest.raises(ConfigError):
        PsdParams(window="kaiser")


def test_single_tone():
    dt = 1e-5
    t = np.arange(16384) * dt
    psd = welch_psd(np.sin(2 * np.pi * 1e3 * t), dt)
    assert psd.resolution == pytest.approx(1 / (2048 * dt))
    peaks = extract_peaks(psd)
    assert len(peaks) == 1
    assert peaks.frequencies[0] == pytest.approx(1e3, abs=psd.resolution)


def test_parseval_with_rectangular_window():
    x = np.random.default_rng(0).normal(size=1024)
    psd = welch_psd(x, 1e-3, PsdParams(segment_length=1024, overlap_fraction=0.0, window="rectangular", detrend="none"))
    assert np.sum(psd.power) * psd.resolution == pytest.approx(np.mean(x**2), rel=1e-10)


def test_constant_signal_has_no_peaks():
    psd = welch_psd(np.full(4096, 3.0), 1e-6)
    assert np.all(psd.power < 1e-20)
    assert len(extract_peaks(psd)) == 0


def test_six_tones():
    dt = 1e-6
    t = np.arange(8192) * dt
    tones = [50e3, 120e3, 200e3, 310e3, 400e3, 470e3]
    x = sum(np.cos(2 * np.pi * f * t) for f in tones)
    psd = welch_psd(x, dt, PsdParams(segment_length=1024))
    peaks = extract_peaks(psd)
    assert len(peaks) == 6
    for found, expected in zip(sorted(peaks.frequencies), tones):
        assert found == pytest.approx(expected, abs=psd.resolution)


def test_peaks_sorted_and_truncated():
    dt = 1e-6
    t = np.arange(8192) * dt
    x = 3 * np.cos(2 * np.pi * 100e3 * t) + 2 * np.cos(2 * np.pi * 250e3 * t) + np.cos(2 * np.pi * 400e3 * t)
    peaks = extract_peaks(welch_psd(x, dt, PsdParams(segment_length=1024)), max_peaks=2)
    assert len(peaks) == 2
    assert peaks.frequencies[0] == pytest.approx(100e3, abs=1e3)
    assert peaks.frequencies[1] == pytest.approx(250e3, abs=1e3)


def test_short_signal_is_rejected():
    with pytest.raises(ConfigError):
        welch_psd(np.zeros(32), 1e-6, PsdParams(segment_length=64))
    with pytest.raises(ConfigError):
        welch_psd(np.zeros(64), 0.0)
