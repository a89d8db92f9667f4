import pytest

from gevreg.dynamics import HyperfineVector, RegisterConfig
from gevreg.readout.photon import PhotonModel


@pytest.fixture
def register_a():
    """13C_A alone at the measured field."""
    return RegisterConfig.measured_sample("A")


@pytest.fixture
def register_ab():
    return RegisterConfig.measured_sample("AB")


@pytest.fixture
def bare_register():
    return RegisterConfig(B_z=0.096837, T2_e=3.52e-3, T1_e=20.7)


@pytest.fixture
def longitudinal_register():
    """13C_A without its perpendicular coupling."""
    return RegisterConfig(B_z=0.096837, nuclei=(HyperfineVector(0.0, -2963e3),), T2_e=3.52e-3)


@pytest.fixture
def calibrated_model():
    return PhotonModel()
