"""Dense spin-1/2 algebra for a register of one electron and up to three nuclei.

Site 0 is always the electron, nuclei follow in configuration order. Operators
are plain complex ``numpy`` arrays of dimension ``2**n_sites``.
"""

from dataclasses import dataclass
from functools import reduce
from typing import Tuple

import numpy as np
import scipy.linalg

from gevreg.constants import HERMITIAN_TOL, POSITIVITY_TOL, TRACE_TOL
from gevreg.errors import PhysicsError

ComplexMatrix = np.ndarray

MAX_SITES = 4

_SX = np.array([[0, 0.5], [0.5, 0]], dtype=complex)
_SY = np.array([[0, -0.5j], [0.5j, 0]], dtype=complex)
_SZ = np.array([[0.5, 0], [0, -0.5]], dtype=complex)
IDENTITY2 = np.eye(2, dtype=complex)

# basis: index 0 is spin up (ms=+1/2), index 1 spin down
UP = np.array([1, 0], dtype=complex)
DOWN = np.array([0, 1], dtype=complex)


def spin_half_operators() -> Tuple[ComplexMatrix, ComplexMatrix, ComplexMatrix]:
    """Return copies of the spin-1/2 operators (Sx, Sy, Sz)."""
    return _SX.copy(), _SY.copy(), _SZ.copy()


def embed(op: ComplexMatrix, site: int, n_sites: int) -> ComplexMatrix:
    """Place a single-site operator on ``site`` of an ``n_sites`` register.

    Args:
        op (ComplexMatrix): 2x2 operator.
        site (int): Target site, 0 is the electron.
        n_sites (int): Total number of spins.

    Returns:
        ComplexMatrix: Operator of dimension ``2**n_sites``.

    Raises:
        PhysicsError: If ``site`` is out of range or ``op`` is not 2x2.
    """
    if not 0 <= site < n_sites:
        raise PhysicsError(f"site {site} out of range for {n_sites} sites")
    if np.shape(op) != (2, 2):
        raise PhysicsError("only 2x2 single-site operators can be embedded")
    factors = [IDENTITY2] * n_sites
    factors[site] = np.asarray(op, dtype=complex)
    return reduce(np.kron, factors)


def kron_all(*ops: ComplexMatrix) -> ComplexMatrix:
    """Tensor product of the given operators or state vectors, left to right."""
    return reduce(np.kron, ops)


def is_hermitian(m: ComplexMatrix, tol: float = HERMITIAN_TOL) -> bool:
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)


def unitarity_error(u: ComplexMatrix) -> float:
    """Max-norm of ``U U^dagger - I``."""
    return float(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))))


def expm_hermitian(h: ComplexMatrix, t: float) -> ComplexMatrix:
    """Propagator ``exp(-i H t)`` of a Hermitian generator by eigendecomposition.

    ``H`` is in angular units (rad/s), ``t`` in seconds.

    Raises:
        PhysicsError: If ``H`` is not Hermitian within tolerance.
    """
    h = np.asarray(h, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(h), initial=0.0)))
    if not is_hermitian(h, HERMITIAN_TOL * scale):
        raise PhysicsError("expm_hermitian requires a Hermitian matrix")
    h = 0.5 * (h + h.conj().T)
    energies, vectors = scipy.linalg.eigh(h)
    phases = np.exp(-1j * energies * t)
    return (vectors * phases) @ vectors.conj().T


@dataclass(frozen=True)
class DensityState:
    """Hermitian, unit-trace state of the (1 + n_nuclei)-spin register.

    Attributes:
        matrix (ComplexMatrix): Density matrix.
        n_nuclei (int): Number of nuclear spins, the electron is site 0.
    """

    matrix: ComplexMatrix
    n_nuclei: int = 0

    def __post_init__(self):
        dim = 2 ** (1 + self.n_nuclei)
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (dim, dim):
            raise PhysicsError(f"density matrix must be {dim}x{dim} for {self.n_nuclei} nuclei")
        if not is_hermitian(m):
            raise PhysicsError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > TRACE_TOL:
            raise PhysicsError("density matrix trace differs from 1")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_vector(cls, psi, n_nuclei: int = 0) -> "DensityState":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), n_nuclei)

    @classmethod
    def product(cls, electron: ComplexMatrix, nuclei) -> "DensityState":
        """Product state of an electron 2x2 density matrix and nuclear 2x2 density matrices."""
        nuclei = list(nuclei)
        return cls(kron_all(np.asarray(electron, dtype=complex), *nuclei), len(nuclei))

    def evolve(self, u: ComplexMatrix) -> "DensityState":
        """Return ``U rho U^dagger`` with Hermiticity restored against round-off."""
        m = u @ self.matrix @ u.conj().T
        return DensityState(0.5 * (m + m.conj().T), self.n_nuclei)

    def expectation(self, op: ComplexMatrix) -> float:
        return float(np.real(np.trace(self.matrix @ op)))

    def is_positive(self, tol: float = POSITIVITY_TOL) -> bool:
        return bool(np.min(np.linalg.eigvalsh(self.matrix)) >= -tol)

    def electron_population_up(self) -> float:
        """Probability of finding the electron in ms=+1/2."""
        half = self.dim // 2
        return float(np.real(np.trace(self.matrix[:half, :half])))

    def nuclear_reduced(self) -> ComplexMatrix:
        """Trace out the electron, returning the joint nuclear density matrix."""
        half = self.dim // 2
        return self.matrix[:half, :half] + self.matrix[half:, half:]

    def reduced_site(self, site: int) -> ComplexMatrix:
        """2x2 reduced density matrix of a single site."""
        n_sites = 1 + self.n_nuclei
        t = self.matrix.reshape([2] * (2 * n_sites))
        letters = "abcdefghijklmnop"
        rows = list(letters[:n_sites])
        cols = list(letters[:n_sites])
        rows[site] = "x"
        cols[site] = "y"
        return np.einsum("".join(rows + cols) + "->xy", t)

    def project_electron(self, up: bool) -> Tuple[float, "DensityState"]:
        """Projective electron measurement in the Sz basis.

        Returns:
            tuple: Outcome probability and the normalized post-measurement state
            (``None`` when the probability vanishes).
        """
        half = self.dim // 2
        sl = slice(0, half) if up else slice(half, None)
        block = self.matrix[sl, sl]
        prob = float(np.real(np.trace(block)))
        if prob <= 0.0:
            return 0.0, None
        m = np.zeros_like(self.matrix)
        m[sl, sl] = block / prob
        return prob, DensityState(m, self.n_nuclei)


def thermal_nuclei(n_nuclei: int) -> ComplexMatrix:
    """Maximally mixed state of ``n_nuclei`` nuclear spins."""
    dim = 2**n_nuclei
    return np.eye(dim, dtype=complex) / dim


def electron_down_thermal(n_nuclei: int) -> DensityState:
    """Electron in |down> (the dark state) with thermal nuclei."""
    return DensityState(np.kron(np.outer(DOWN, DOWN.conj()), thermal_nuclei(n_nuclei)), n_nuclei)
