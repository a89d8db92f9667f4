import numpy as np
import pytest

from gevreg.constants import SAMPLE_PEAKS, UNITARY_TOL
from gevreg.dynamics import (
    DriveParams,
    HyperfineVector,
    RegisterConfig,
    apply_dephasing,
    build_hamiltonian,
    conditional_frequencies,
    conditioned_block,
    free_propagator,
    hyperfine_detunings,
    resonant_tau_dd,
)
from gevreg.errors import ConfigError, PhysicsError
from gevreg.spin_core import DensityState, is_hermitian, unitarity_error


def test_register_validation():
    with pytest.raises(ConfigError):
        RegisterConfig(B_z=0.0)
    with pytest.raises(ConfigError):
        RegisterConfig(B_z=0.1, nuclei=[HyperfineVector(1e3, 1e3)] * 4)
    with pytest.raises(ConfigError):
        RegisterConfig(B_z=0.1, T2_e=-1.0)
    with pytest.raises(ConfigError):
        HyperfineVector(float("nan"), 0.0)
    with pytest.raises(ConfigError):
        DriveParams(rabi=-1.0)


def test_measured_sample_register(register_ab):
    assert register_ab.n_nuclei == 2
    assert register_ab.larmor_frequency == pytest.approx(1.036969e6, rel=1e-5)
    assert register_ab.T2_e == pytest.approx(3.52e-3)


def test_hamiltonian_is_hermitian(register_ab):
    h = build_hamiltonian(register_ab, DriveParams(rabi=7.65e6, phase=0.3, detuning=1e5, duration=1e-7))
    assert h.shape == (8, 8)
    assert is_hermitian(h, 1e-3)
    assert unitarity_error(free_propagator(register_ab, 1e-6)) < UNITARY_TOL


def test_free_propagator_rejects_negative_time(register_a):
    with pytest.raises(PhysicsError):
        free_propagator(register_a, -1e-9)


def test_conditional_frequencies_of_c13a(register_a):
    f_up, f_dn = conditional_frequencies(register_a, 0)
    assert f_up == pytest.approx(2.53615e6, rel=1e-4)
    assert f_dn == pytest.approx(0.53573e6, rel=1e-3)


@pytest.mark.parametrize("nuclei", ["A", "B"])
def test_conditional_frequencies_match_block_eigenvalues(nuclei):
    cfg = RegisterConfig.measured_sample(nuclei)
    expected = conditional_frequencies(cfg, 0)
    for ms, f in zip((0.5, -0.5), expected):
        levels = np.linalg.eigvalsh(conditioned_block(cfg, 0, ms))
        assert levels[1] - levels[0] == pytest.approx(f, rel=1e-9)


@pytest.mark.parametrize("nuclei", ["A", "B"])
def test_conditional_frequencies_near_measured_peaks(nuclei):
    # measured lines sit a few percent off the closed form because the field drifted
    predicted = sorted(conditional_frequencies(RegisterConfig.measured_sample(nuclei), 0))
    measured = SAMPLE_PEAKS["C13_" + nuclei]
    assert predicted == pytest.approx(list(measured), rel=0.08)


def test_conditional_frequencies_bad_index(register_a):
    with pytest.raises(PhysicsError):
        conditional_frequencies(register_a, 1)


def test_resonant_tau_dd(register_a):
    f_up, f_dn = conditional_frequencies(register_a, 0)
    assert resonant_tau_dd(register_a, 0) == pytest.approx(1 / (f_up + f_dn))
    assert resonant_tau_dd(register_a, 0, 2) == pytest.approx(5 / (f_up + f_dn))
    assert resonant_tau_dd(register_a, 0) == pytest.approx(0.3255e-6, rel=2e-3)


def test_hyperfine_detunings(register_a, register_ab):
    assert np.allclose(hyperfine_detunings(register_a), [-1.4815e6, 1.4815e6])
    # nucleus A is the most significant bit
    assert np.allclose(hyperfine_detunings(register_ab), [-1462e3, -1501e3, 1501e3, 1462e3])


def test_apply_dephasing(register_a):
    plus = np.array([1, 0, 1, 0], dtype=complex) / np.sqrt(2)
    rho = DensityState.from_vector(plus, 1)
    damped = apply_dephasing(rho, register_a.T2_e, register_a)
    assert abs(damped.matrix[0, 2]) == pytest.approx(0.5 * np.exp(-1))
    assert damped.matrix[0, 0] == pytest.approx(rho.matrix[0, 0])
    with pytest.raises(PhysicsError):
        apply_dephasing(DensityState.from_vector([1, 1]), 1e-6, RegisterConfig(B_z=0.1))
