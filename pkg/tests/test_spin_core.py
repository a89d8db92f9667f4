import numpy as np
import pytest
import scipy.linalg

from gevreg.constants import UNITARY_TOL
from gevreg.errors import PhysicsError
from gevreg.spin_core import (
    DOWN,
    UP,
    DensityState,
    electron_down_thermal,
    embed,
    expm_hermitian,
    kron_all,
    spin_half_operators,
    unitarity_error,
)


def test_embed_places_operator_on_site():
    _, _, sz = spin_half_operators()
    op = embed(sz, 0, 2)
    assert op.shape == (4, 4)
    assert np.allclose(np.diag(op).real, [0.5, 0.5, -0.5, -0.5])
    op = embed(sz, 1, 2)
    assert np.allclose(np.diag(op).real, [0.5, -0.5, 0.5, -0.5])


def test_embed_rejects_bad_site():
    _, _, sz = spin_half_operators()
    with pytest.raises(PhysicsError):
        embed(sz, 2, 2)


def test_expm_hermitian_matches_pade():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    h = a + a.conj().T
    u = expm_hermitian(h, 0.37)
    assert unitarity_error(u) < UNITARY_TOL
    assert np.allclose(u, scipy.linalg.expm(-1j * h * 0.37), atol=1e-10)


def test_expm_hermitian_rejects_non_hermitian():
    with pytest.raises(PhysicsError):
        expm_hermitian(np.array([[0, 1], [0, 0]], dtype=complex), 1.0)


def test_density_state_validation():
    with pytest.raises(PhysicsError):
        DensityState(np.eye(2, dtype=complex), 0)
    with pytest.raises(PhysicsError):
        DensityState(np.eye(4, dtype=complex) / 4, 0)


def test_reduced_site_of_product_state():
    plus = (UP + DOWN) / np.sqrt(2)
    rho = DensityState.from_vector(kron_all(DOWN, plus), 1)
    assert np.allclose(rho.reduced_site(0), np.outer(DOWN, DOWN))
    assert np.allclose(rho.reduced_site(1), np.outer(plus, plus.conj()))


def test_project_electron():
    psi = kron_all((UP + DOWN) / np.sqrt(2), UP)
    rho = DensityState.from_vector(psi, 1)
    prob, post = rho.project_electron(up=True)
    assert prob == pytest.approx(0.5)
    assert post.electron_population_up() == pytest.approx(1.0)
    prob, post = DensityState.from_vector(kron_all(DOWN, UP), 1).project_electron(up=True)
    assert prob == 0.0
    assert post is None


def test_electron_down_thermal():
    rho = electron_down_thermal(2)
    assert rho.dim == 8
    assert rho.electron_population_up() == pytest.approx(0.0)
    assert np.allclose(rho.nuclear_reduced(), np.eye(4) / 4)
    assert rho.is_positive()
