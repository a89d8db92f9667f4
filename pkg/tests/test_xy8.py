import numpy as np
import pytest
import scipy.linalg

from gevreg.dynamics import build_hamiltonian, resonant_tau_dd
from gevreg.errors import ConfigError
from gevreg.sequences import xy8_echo
from gevreg.sequences.pulses import ElementKind
from gevreg.spectra.xy8 import OrderSweep, entangling_order, simulate_order_sweep, simulate_xy8_spectrum

RABI = 7.65e6


def _shot_by_shot_survival(cfg, tau_dd, order_n):
    """Average P(down) over nuclear basis states, stepping a state vector element by element."""
    seq = xy8_echo(tau_dd, order_n, RABI)
    dim = 2 ** (1 + cfg.n_nuclei)
    half = dim // 2
    total = 0.0
    for n in range(half):
        psi = np.zeros(dim, dtype=complex)
        psi[half + n] = 1.0
        for element in seq.elements:
            drive = element.drive if element.kind is ElementKind.DRIVE else None
            psi = scipy.linalg.expm(-1j * build_hamiltonian(cfg, drive) * element.duration) @ psi
        total += np.sum(np.abs(psi[half:]) ** 2)
    return total / half


def test_uncoupled_electron_survives(bare_register):
    spectrum = simulate_xy8_spectrum(bare_register, np.linspace(0.2e-6, 0.5e-6, 5), 1)
    assert np.allclose(spectrum.survival, 1.0, atol=1e-9)


def test_matches_state_vector_oracle(register_a):
    grid = resonant_tau_dd(register_a, 0) * np.array([0.95, 1.0, 1.05])
    spectrum = simulate_xy8_spectrum(register_a, grid, 1, RABI)
    for tau, value in zip(grid, spectrum.survival):
        assert value == pytest.approx(_shot_by_shot_survival(register_a, tau, 1), abs=1e-9)


def test_resonant_nucleus_pulls_survival_down(register_a):
    grid = resonant_tau_dd(register_a, 0) * np.linspace(0.9, 1.1, 21)
    spectrum = simulate_xy8_spectrum(register_a, grid, 1, RABI, ideal_pulses=True)
    assert spectrum.survival.min() < 0.99
    assert np.all((spectrum.survival >= -1e-12) & (spectrum.survival <= 1 + 1e-12))


def test_empty_grid_is_rejected(register_a):
    with pytest.raises(ConfigError):
        simulate_xy8_spectrum(register_a, [], 1)


def test_uncoupled_order_sweep_stays_down(bare_register):
    sweep = simulate_order_sweep(bare_register, 0.3e-6, [1, 2, 4])
    assert list(sweep.n_pulses) == [8, 16, 32]
    assert np.allclose(sweep.sigma_z, -1.0, atol=1e-5)


def test_entangling_order():
    sweep = OrderSweep(np.array([1, 2, 3, 4]), np.array([8, 16, 24, 32]), np.array([-0.8, -0.3, 0.1, 0.6]), 0.3e-6)
    assert entangling_order(sweep) == 3
