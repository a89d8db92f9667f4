import numpy as np
import pytest
import scipy.linalg

from gevreg.dynamics import RegisterConfig, resonant_tau_dd
from gevreg.errors import ConfigError, PhysicsError
from gevreg.readout.photon import PhotonModel
from gevreg.readout.nuclear import (
    NuclearSsrParams,
    back_action_probabilities,
    best_cell,
    detuning_spread,
    fidelity_to_pure,
    mbi_postselect,
    mbi_project,
    nuclear_jump_probability,
    product_basis_state,
    rabi_sweep,
    reads_threshold_grid,
    repetitions_curve,
    run_nuclear_ssr,
    selective_transition_matrix,
    transition_matrix,
)
from gevreg.readout.ssr import Outcome
from gevreg.sequences import cnnote_gate, rabi_flip_probability
from gevreg.spin_core import spin_half_operators

SX, SY, SZ = spin_half_operators()
I2 = np.eye(2)


def _gate_oracle(cfg, rabi, target_detuning):
    """Two-body gate propagator built directly from Kronecker products."""
    a = cfg.nuclei[0]
    h = (
        target_detuning * np.kron(SZ, I2)
        + rabi * np.kron(SY, I2)
        - cfg.larmor_frequency * np.kron(I2, SZ)
        + a.A_zx * np.kron(SZ, SX)
        + a.A_zz * np.kron(SZ, SZ)
    )
    return scipy.linalg.expm(-2j * np.pi * h / (2 * rabi))


def test_transition_matrix_matches_direct_exponential(register_a):
    rabi = 765e3
    expected = np.abs(_gate_oracle(register_a, rabi, 0.5 * register_a.nuclei[0].A_zz)) ** 2
    assert np.max(np.abs(transition_matrix(register_a, rabi) - expected)) < 1e-8


def test_transition_matrix_is_doubly_stochastic(register_ab):
    table = transition_matrix(register_ab, 900e3, nucleus=1)
    assert np.allclose(table.sum(axis=0), 1.0)
    assert np.allclose(table.sum(axis=1), 1.0)


def test_back_action_without_transverse_coupling(longitudinal_register):
    resonant = back_action_probabilities(longitudinal_register, 765e3, ("down", "down"))
    assert resonant.p_e_flip == pytest.approx(1.0, abs=1e-9)
    assert resonant.p_n_flip == pytest.approx(0.0, abs=1e-12)

    rabi = 600e3
    detuned = back_action_probabilities(longitudinal_register, rabi, ("down", "up"))
    assert detuned.p_e_flip == pytest.approx(rabi_flip_probability(rabi, 2963e3, 1 / (2 * rabi)), abs=1e-9)
    assert detuned.p_n_flip == pytest.approx(0.0, abs=1e-12)


def test_two_cycle_rabi_suppresses_wrong_line(longitudinal_register):
    detuned = back_action_probabilities(longitudinal_register, 2963e3 / np.sqrt(15), ("down", "up"))
    assert detuned.p_e_flip < 1e-12


def test_back_action_is_deterministic(register_a):
    first = back_action_probabilities(register_a, 765e3, ("down", "down"))
    assert first == back_action_probabilities(register_a, 765e3, ("down", "down"))
    assert 0.0 < first.p_n_flip < 1.0


def test_back_action_rejects_bad_input(register_a):
    with pytest.raises(ConfigError):
        back_action_probabilities(register_a, 765e3, ("sideways", "down"))
    with pytest.raises(PhysicsError):
        back_action_probabilities(register_a, 765e3, nucleus=3)


def test_mbi_project():
    _, sy, _ = spin_half_operators()
    assert np.real(np.trace(mbi_project(Outcome.DARK) @ sy)) == pytest.approx(0.5)
    assert np.real(np.trace(mbi_project("B") @ sy)) == pytest.approx(-0.5)
    with pytest.raises(ConfigError):
        mbi_project(Outcome.REJECTED)


def test_mbi_postselect_probabilities_add_up(register_a):
    seq = cnnote_gate(resonant_tau_dd(register_a, 0), 1, 7.65e6)
    p_d, rho_d = mbi_postselect(register_a, seq, Outcome.DARK)
    p_b, _ = mbi_postselect(register_a, seq, Outcome.BRIGHT)
    assert p_d + p_b == pytest.approx(1.0)
    assert rho_d.electron_population_up() == pytest.approx(0.0)


def test_fidelity_to_pure():
    psi = product_basis_state("down", "up")
    assert psi.shape == (4,)
    assert fidelity_to_pure(np.outer(psi, psi.conj()), psi) == pytest.approx(1.0)


def test_params_validation():
    with pytest.raises(ConfigError):
        NuclearSsrParams(rabi=0.0)
    with pytest.raises(ConfigError):
        NuclearSsrParams(init_fidelity_n=1.5)


def test_nuclear_readout_without_back_action(longitudinal_register, calibrated_model):
    params = NuclearSsrParams(rabi=765e3, n_reads=2, threshold=2, init_fidelity_n=1.0)
    result = run_nuclear_ssr(longitudinal_register, calibrated_model, params, shots=5000, seed=4)
    assert result.fidelity > 0.99
    assert result.qnd_fidelity > 0.98


def test_nuclear_readout_with_transverse_coupling(register_a, calibrated_model):
    a = run_nuclear_ssr(register_a, calibrated_model, shots=3000, seed=2)
    b = run_nuclear_ssr(register_a, calibrated_model, shots=3000, seed=2)
    assert a.confusion == b.confusion
    assert 0.5 < a.fidelity <= 1.0


def test_sweeps(register_a, calibrated_model):
    fidelities = rabi_sweep(register_a, calibrated_model, [500e3, 765e3], shots=1000, seed=1)
    assert fidelities.shape == (2,)
    grid = reads_threshold_grid(register_a, calibrated_model, [1, 2, 3], [1, 2, 3, 4], shots=1000, seed=1)
    assert grid.shape == (3, 4)
    assert ((grid >= 0) & (grid <= 1)).all()
    reads, threshold = best_cell(grid, [1, 2, 3], [1, 2, 3, 4])
    assert grid[reads - 1, threshold - 1] == grid.max()
    curve = repetitions_curve(register_a, calibrated_model, 3, shots=1000, seed=1)
    assert curve.shape == (3,)


RABI_GRID = [400e3, 500e3, 600e3, 765e3, 900e3, 1100e3, 1400e3]


@pytest.fixture
def dephased_register():
    """13C_A with the electron T2* of the nuclear readout scenario."""
    return RegisterConfig.measured_sample("A", T2_star_e=1.5e-6)


@pytest.fixture
def readout_model():
    return PhotonModel(cyclicity=5.0e4, init_fidelity_e=0.98)


def test_back_action_at_800khz(longitudinal_register, register_a):
    rabi = 800e3
    resonant = back_action_probabilities(longitudinal_register, rabi, ("down", "down"))
    assert resonant.p_e_flip == pytest.approx(1.0, abs=1e-9)
    detuned = back_action_probabilities(longitudinal_register, rabi, ("down", "up"))
    assert detuned.p_e_flip == pytest.approx(0.0044, abs=2e-4)
    assert detuned.p_n_flip == pytest.approx(0.0, abs=1e-12)

    targeted = back_action_probabilities(register_a, rabi, ("down", "down"))
    assert targeted.p_e_flip == pytest.approx(0.907, abs=0.01)
    assert targeted.p_n_flip == pytest.approx(0.086, abs=0.01)
    other = back_action_probabilities(register_a, rabi, ("down", "up"))
    assert other.p_e_flip == pytest.approx(0.093, abs=0.01)
    assert other.p_n_flip == pytest.approx(0.172, abs=0.01)


def test_selective_table_matches_exact_gate_without_transverse_coupling(longitudinal_register):
    for offset in (0.0, 120e3):
        exact = transition_matrix(longitudinal_register, 765e3, detuning_offset=offset)
        selective = selective_transition_matrix(longitudinal_register, 765e3, detuning_offset=offset)
        assert np.max(np.abs(exact - selective)) < 1e-8


def test_selective_table_keeps_the_nucleus(register_a):
    table = selective_transition_matrix(register_a, 900e3)
    assert np.allclose(table.sum(axis=0), 1.0)
    for initial in range(4):
        for final in range(4):
            if final % 2 != initial % 2:
                assert table[final, initial] == 0.0


def test_detuning_spread(register_a, dephased_register):
    assert detuning_spread(register_a) == 0.0
    assert detuning_spread(dephased_register) == pytest.approx(150.05e3, rel=1e-3)


def test_jump_probability_follows_gate_model(register_a, longitudinal_register):
    assert nuclear_jump_probability(longitudinal_register, NuclearSsrParams()) == pytest.approx(0.0, abs=1e-12)
    selective = nuclear_jump_probability(register_a, NuclearSsrParams(rabi=800e3))
    assert selective == pytest.approx(back_action_probabilities(register_a, 800e3).p_n_flip)
    assert nuclear_jump_probability(register_a, NuclearSsrParams(gate_model="exact")) == 0.0
    with pytest.raises(ConfigError):
        NuclearSsrParams(gate_model="bloch")


def test_exact_gate_model_runs(register_a, readout_model):
    params = NuclearSsrParams(gate_model="exact")
    result = run_nuclear_ssr(register_a, readout_model, params, shots=2000, seed=5)
    assert 0.5 < result.fidelity < 1.0


def test_rabi_optimum_sits_at_two_detuned_cycles(dephased_register, readout_model):
    fidelities = rabi_sweep(dephased_register, readout_model, RABI_GRID, shots=20000, seed=3)
    assert RABI_GRID[int(np.argmax(fidelities))] == 765e3
    # slow gates lose the targeted line to the detuning spread
    assert fidelities[0] < fidelities[3] - 0.01
    # fast gates leak onto the other line
    assert fidelities[-1] < fidelities[3] - 0.01


def test_two_reads_with_threshold_two_is_best(dephased_register, readout_model):
    reads, thresholds = [1, 2, 3, 4], [1, 2, 3, 4, 5]
    grid = reads_threshold_grid(dephased_register, readout_model, reads, thresholds, shots=20000, seed=3)
    assert best_cell(grid, reads, thresholds) == (2, 2)
    assert 0.89 < grid[1, 1] < 0.94
    curve = repetitions_curve(dephased_register, readout_model, 4, shots=20000, seed=3)
    assert int(np.argmax(curve)) == 1
