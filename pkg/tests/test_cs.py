import numpy as np
import pytest

from gevreg.dynamics import RegisterConfig, conditional_frequencies, resonant_tau_dd
from gevreg.errors import ConfigError, SequenceError
from gevreg.readout.photon import PhotonModel
from gevreg.sequences import ElementKind
from gevreg.spectra.cs import CsPlan, block_sequence, cs_spectrum, persistent_peaks, simulate_cs, simulate_cs_2d
from gevreg.spectra.psd import PsdParams

SEGMENT = PsdParams(segment_length=512)


@pytest.fixture
def dephased_register():
    return RegisterConfig.measured_sample("A", T2_star_e=1e-6)


def _plan(cfg, count=1024, **kwargs):
    return CsPlan.from_range(resonant_tau_dd(cfg, 0), 1, 5e-6, 1e-7, count, **kwargs)


def test_plan_validation():
    with pytest.raises(ConfigError):
        CsPlan(0.3e-6, 1, tuple(np.arange(4) * 1e-7))
    with pytest.raises(ConfigError):
        CsPlan(0.3e-6, 1, (1, 2, 3, 5, 6, 7, 8, 9))
    with pytest.raises(ConfigError):
        CsPlan.from_range(0.3e-6, 1, 5e-6, 1e-7, 16, memory_mode="sometimes")
    plan = CsPlan.from_range(0.3e-6, 1, 5e-6, 1e-7, 16)
    assert plan.sample_interval == pytest.approx(1e-7)
    assert len(block_sequence(plan).drives()) == 10
    assert block_sequence(plan).elements[-1].kind is ElementKind.PROJECTIVE_MARKER


def test_plan_must_respect_coherence_window(dephased_register):
    short = CsPlan.from_range(0.3e-6, 1, 0.5e-6, 1e-7, 16)
    with pytest.raises(SequenceError):
        simulate_cs(dephased_register, short)
    slow = RegisterConfig.measured_sample("A", T1_e=1e-6)
    with pytest.raises(SequenceError):
        simulate_cs(slow, CsPlan.from_range(0.3e-6, 1, 5e-6, 1e-7, 16))


def test_memoryless_spectrum_shows_both_branches(dephased_register):
    result = simulate_cs(dephased_register, _plan(dephased_register))
    assert np.all((result.signal >= -1e-12) & (result.signal <= 1 + 1e-12))
    psd, peaks = cs_spectrum(result, SEGMENT)
    f_up, f_dn = conditional_frequencies(dephased_register, 0)
    assert len(peaks) == 2
    low, high = sorted(peaks.frequencies)
    assert low == pytest.approx(f_dn, abs=psd.resolution)
    assert high == pytest.approx(f_up, abs=psd.resolution)


def test_randomized_order_does_not_change_memoryless_signal(dephased_register):
    ordered = simulate_cs(dephased_register, _plan(dephased_register, 64), seed=1)
    shuffled = simulate_cs(dephased_register, _plan(dephased_register, 64, randomize_tau=True), seed=1)
    assert np.allclose(ordered.signal, shuffled.signal, atol=1e-12)
    assert not np.array_equal(shuffled.acquisition_order, np.arange(64))
    assert sorted(shuffled.acquisition_order) == list(range(64))


def test_memory_mode_is_reproducible(dephased_register):
    plan = _plan(dephased_register, 16, memory_mode="memory", shots_per_point=4, randomize_tau=True)
    a = simulate_cs(dephased_register, plan, seed=7)
    b = simulate_cs(dephased_register, plan, seed=7)
    assert np.array_equal(a.signal, b.signal)
    assert set(np.round(a.signal * 4)).issubset({0.0, 1.0, 2.0, 3.0, 4.0})


def test_photon_readout_gives_fractions(dephased_register):
    plan = _plan(dephased_register, 16, shots_per_point=50)
    result = simulate_cs(dephased_register, plan, seed=3, model=PhotonModel())
    assert np.all((result.signal >= 0) & (result.signal <= 1))
    assert np.allclose(result.signal * 50, np.round(result.signal * 50))


def test_2d_scan_is_thread_independent(dephased_register):
    tau_res = resonant_tau_dd(dephased_register, 0)
    grid = [tau_res, 1.01 * tau_res]
    plan = _plan(dephased_register)
    serial = simulate_cs_2d(dephased_register, grid, plan, seed=2, params=SEGMENT, threads=1)
    parallel = simulate_cs_2d(dephased_register, grid, plan, seed=2, params=SEGMENT, threads=2)
    assert [row.tau_dd for row in parallel] == grid
    for a, b in zip(serial, parallel):
        assert np.array_equal(a.result.signal, b.result.signal)
    f_up, f_dn = conditional_frequencies(dephased_register, 0)
    recurring = persistent_peaks(serial)
    assert len(recurring) == 2
    assert recurring[0] == pytest.approx(f_dn, abs=serial[0].psd.resolution)
    assert recurring[1] == pytest.approx(f_up, abs=serial[0].psd.resolution)


def test_2d_scan_needs_grid(dephased_register):
    with pytest.raises(ConfigError):
        simulate_cs_2d(dephased_register, [], _plan(dephased_register, 16))


def _db(x):
    return 10 * np.log10(x)


def test_randomized_order_suppresses_memory_harmonics(dephased_register):
    memoryless = simulate_cs(dephased_register, _plan(dephased_register))
    sequential = simulate_cs(dephased_register, _plan(dephased_register, memory_mode="ensemble"), seed=5)
    shuffled = simulate_cs(dephased_register, _plan(dephased_register, memory_mode="ensemble", randomize_tau=True), seed=5)
    psd_free, _ = cs_spectrum(memoryless, SEGMENT)
    psd_seq, _ = cs_spectrum(sequential, SEGMENT)
    psd_rnd, peaks_rnd = cs_spectrum(shuffled, SEGMENT)

    f_up, f_dn = conditional_frequencies(dephased_register, 0)
    freqs = psd_seq.frequencies
    away = (np.abs(freqs - f_up) > 3 * psd_seq.resolution) & (np.abs(freqs - f_dn) > 3 * psd_seq.resolution) & (freqs > 0)
    floor = np.maximum(psd_free.power, 1e-9 * psd_free.power.max())
    excess = np.where(away, _db(psd_seq.power) - _db(floor), -np.inf)
    spur = int(np.argmax(excess))
    # the carried-over nuclear state adds a harmonic absent without memory
    assert excess[spur] >= 10
    assert _db(psd_seq.power[spur]) - _db(psd_rnd.power[spur]) >= 10
    for f in (f_up, f_dn):
        assert min(abs(p - f) for p in peaks_rnd.frequencies) <= psd_rnd.resolution
