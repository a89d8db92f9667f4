"""Rotating-frame Hamiltonian of the electron-nuclear register and its propagators.

All configuration frequencies are ordinary frequencies in Hz. The conversion
to angular units happens only in :func:`build_hamiltonian`; every matrix
returned from this module is therefore in rad/s and can be fed directly to
:func:`gevreg.spin_core.expm_hermitian`.

Phase convention: the drive term is ``Omega (Sx sin(theta) + Sy cos(theta))``,
so ``theta = 0`` drives Sy. The sequences module labels ``theta = pi/2`` as an
"x" pulse and ``theta = 0`` as a "y" pulse.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from gevreg.constants import C13_A_COUPLING, C13_B_COUPLING, GAMMA_C13, GAMMA_GEV, T2_E, T1_E, SAMPLE_FIELD_T, TWO_PI
from gevreg.errors import ConfigError, PhysicsError
from gevreg.spin_core import ComplexMatrix, DensityState, embed, expm_hermitian, spin_half_operators

MAX_NUCLEI = 3

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HyperfineVector:
    """Secular hyperfine coupling of one nucleus, in Hz (the quoted A/2pi values).

    Attributes:
        A_zx (float): Perpendicular coupling.
        A_zz (float): Parallel coupling.
        A_zy (float): Second perpendicular component, zero in the rotated frame.
    """

    A_zx: float
    A_zz: float
    A_zy: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.A_zx, self.A_zy, self.A_zz)):
            raise ConfigError("hyperfine components must be finite")


@dataclass(frozen=True)
class DriveParams:
    """Microwave drive on the electron.

    Attributes:
        rabi (float): Rabi frequency Omega_e in Hz.
        phase (float): Drive phase theta in radians.
        detuning (float): Detuning Delta from the electron transition in Hz.
        duration (float): Pulse length in seconds.
    """

    rabi: float = 0.0
    phase: float = 0.0
    detuning: float = 0.0
    duration: float = 0.0

    def __post_init__(self):
        if self.rabi < 0:
            raise ConfigError("rabi frequency must be non-negative")
        if self.duration < 0:
            raise ConfigError("drive duration must be non-negative")


@dataclass(frozen=True)
class RegisterConfig:
    """Static physics of the register.

    Attributes:
        B_z (float): Field along the defect axis in tesla.
        gamma_e (float): Electron gyromagnetic ratio in Hz/T.
        gamma_c (float): 13C gyromagnetic ratio in Hz/T.
        nuclei (tuple): HyperfineVector per nucleus, at most three.
        T2_star_e (float | None): Electron inhomogeneous dephasing time.
        T2_e (float | None): Electron decoherence time under decoupling.
        T1_e (float | None): Electron relaxation time.
        T2_star_n (float | None): Nuclear dephasing time used by Ramsey simulations.
        dephasing_exponent (float): Stretch exponent p of the coherence decay.
    """

    B_z: float
    gamma_e: float = GAMMA_GEV
    gamma_c: float = GAMMA_C13
    nuclei: Tuple[HyperfineVector, ...] = field(default_factory=tuple)
    T2_star_e: Optional[float] = None
    T2_e: Optional[float] = None
    T1_e: Optional[float] = None
    T2_star_n: Optional[float] = None
    dephasing_exponent: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "nuclei", tuple(self.nuclei))
        if not self.B_z > 0:
            raise ConfigError("B_z must be positive")
        if len(self.nuclei) > MAX_NUCLEI:
            raise ConfigError(f"at most {MAX_NUCLEI} nuclei are supported")
        for name in ("T2_star_e", "T2_e", "T1_e", "T2_star_n"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ConfigError(f"{name} must be positive when given")
        if not self.dephasing_exponent > 0:
            raise ConfigError("dephasing_exponent must be positive")

    @property
    def n_nuclei(self) -> int:
        return len(self.nuclei)

    @property
    def larmor_frequency(self) -> float:
        """Bare 13C Larmor frequency gamma_c * B_z in Hz."""
        return self.gamma_c * self.B_z

    @property
    def electron_frequency(self) -> float:
        return self.gamma_e * self.B_z

    def with_nuclei(self, nuclei) -> "RegisterConfig":
        return replace(self, nuclei=tuple(nuclei))

    @classmethod
    def measured_sample(cls, nuclei: str = "AB", **kwargs) -> "RegisterConfig":
        """Register of the measured sample: 13C_A and/or 13C_B at 96.837 mT."""
        couplings = {"A": C13_A_COUPLING, "B": C13_B_COUPLING}
        vectors = tuple(HyperfineVector(A_zx=couplings[k][0], A_zz=couplings[k][1]) for k in nuclei)
        kwargs.setdefault("T2_e", T2_E)
        kwargs.setdefault("T1_e", T1_E)
        return cls(B_z=SAMPLE_FIELD_T, nuclei=vectors, **kwargs)


@lru_cache(maxsize=None)
def _operators(n_nuclei: int):
    """Embedded (S, I_1..I_n) operators for a register with ``n_nuclei`` nuclei."""
    n_sites = 1 + n_nuclei
    sx, sy, sz = spin_half_operators()
    electron = tuple(embed(op, 0, n_sites) for op in (sx, sy, sz))
    nuclear = tuple(tuple(embed(op, 1 + j, n_sites) for op in (sx, sy, sz)) for j in range(n_nuclei))
    return electron, nuclear


def electron_operators(n_nuclei: int) -> Tuple[ComplexMatrix, ComplexMatrix, ComplexMatrix]:
    """Embedded electron (Sx, Sy, Sz); returned arrays must not be modified."""
    return _operators(n_nuclei)[0]


def nuclear_operators(n_nuclei: int, j: int) -> Tuple[ComplexMatrix, ComplexMatrix, ComplexMatrix]:
    """Embedded (Ix, Iy, Iz) of nucleus ``j``; returned arrays must not be modified."""
    return _operators(n_nuclei)[1][j]


def build_hamiltonian(cfg: RegisterConfig, drive: Optional[DriveParams] = None) -> ComplexMatrix:
    """Rotating-frame Hamiltonian in rad/s.

    ``H/2pi = Delta Sz + Omega (Sx sin(theta) + Sy cos(theta)) - sum_j f_L Iz_j
    + Sz sum_j (A_zx Ix_j + A_zy Iy_j + A_zz Iz_j)``.

    Args:
        cfg (RegisterConfig): Register physics.
        drive (DriveParams, optional): Microwave drive, ``None`` for free evolution.

    Returns:
        ComplexMatrix: Hermitian matrix of dimension ``2**(1 + n_nuclei)``.
    """
    n = cfg.n_nuclei
    sx, sy, sz = electron_operators(n)
    h = np.zeros_like(sz)
    if drive is not None:
        h = h + drive.detuning * sz
        h = h + drive.rabi * (math.sin(drive.phase) * sx + math.cos(drive.phase) * sy)
    f_l = cfg.larmor_frequency
    for j, a in enumerate(cfg.nuclei):
        ix, iy, iz = nuclear_operators(n, j)
        h = h - f_l * iz
        h = h + sz @ (a.A_zx * ix + a.A_zy * iy + a.A_zz * iz)
    return TWO_PI * h


def free_propagator(cfg: RegisterConfig, t: float) -> ComplexMatrix:
    """Propagator of the drive-free Hamiltonian over ``t`` seconds."""
    if t < 0:
        raise PhysicsError("free evolution time must be non-negative")
    return expm_hermitian(build_hamiltonian(cfg, None), t)


def drive_propagator(cfg: RegisterConfig, drive: DriveParams) -> ComplexMatrix:
    """Propagator of a rectangular drive pulse including all hyperfine terms."""
    return expm_hermitian(build_hamiltonian(cfg, drive), drive.duration)


def conditioned_block(cfg: RegisterConfig, j: int, ms: float) -> ComplexMatrix:
    """2x2 nuclear Hamiltonian (Hz, not angular) of nucleus ``j`` for electron projection ``ms``."""
    if not 0 <= j < cfg.n_nuclei:
        raise PhysicsError(f"nucleus index {j} out of range")
    sx, sy, sz = spin_half_operators()
    a = cfg.nuclei[j]
    return -cfg.larmor_frequency * sz + ms * (a.A_zx * sx + a.A_zy * sy + a.A_zz * sz)


def conditional_frequencies(cfg: RegisterConfig, j: int) -> Tuple[float, float]:
    """Effective Larmor frequencies (f_up, f_dn) in Hz of nucleus ``j``.

    ``f(ms) = sqrt((f_L - ms A_zz)^2 + ms^2 (A_zx^2 + A_zy^2))`` for ms = +1/2, -1/2.
    """
    if not 0 <= j < cfg.n_nuclei:
        raise PhysicsError(f"nucleus index {j} out of range")
    a = cfg.nuclei[j]
    f_l = cfg.larmor_frequency
    perp2 = a.A_zx**2 + a.A_zy**2

    def _f(ms):
        return math.sqrt((f_l - ms * a.A_zz) ** 2 + ms**2 * perp2)

    return _f(0.5), _f(-0.5)


def resonant_tau_dd(cfg: RegisterConfig, j: int, k: int = 0) -> float:
    """Center-to-center XY8 spacing of the k-th resonance of nucleus ``j``: (2k+1)/(f_up+f_dn)."""
    f_up, f_dn = conditional_frequencies(cfg, j)
    return (2 * k + 1) / (f_up + f_dn)


def hyperfine_detunings(cfg: RegisterConfig) -> np.ndarray:
    """Electron transition detunings (Hz) for every nuclear Iz configuration.

    The secular shift of the electron line is ``sum_j m_j A_zz_j`` with
    ``m_j = +-1/2``. Entries follow the computational basis of the nuclei:
    nucleus 0 is the most significant bit and bit 0 means ``m = +1/2``.
    """
    shifts = np.zeros(1)
    for a in cfg.nuclei:
        shifts = (shifts[:, None] + np.array([0.5, -0.5]) * a.A_zz).ravel()
    return shifts


def apply_dephasing(rho: DensityState, t: float, cfg: RegisterConfig, coherence_time: float = None) -> DensityState:
    """Damp electron coherences by ``exp(-(t/T2)^p)``.

    Args:
        rho (DensityState): Register state.
        t (float): Elapsed time in seconds.
        cfg (RegisterConfig): Supplies ``T2_e`` and the exponent p.
        coherence_time (float, optional): Use this time constant instead of ``T2_e``.

    Raises:
        PhysicsError: If no time constant is available.
    """
    tc = coherence_time if coherence_time is not None else cfg.T2_e
    if tc is None:
        raise PhysicsError("apply_dephasing needs T2_e in the register config")
    if t <= 0:
        return rho
    factor = math.exp(-((t / tc) ** cfg.dephasing_exponent))
    half = rho.dim // 2
    m = rho.matrix.copy()
    m[:half, half:] *= factor
    m[half:, :half] *= factor
    return DensityState(m, rho.n_nuclei)


def apply_nuclear_dephasing(rho: DensityState, t: float, cfg: RegisterConfig, nucleus: int = 0) -> DensityState:
    """Damp the coherences of one nucleus by ``exp(-(t/T2*_n)^p)``; no-op without ``T2_star_n``."""
    if cfg.T2_star_n is None or t <= 0:
        return rho
    if not 0 <= nucleus < rho.n_nuclei:
        raise PhysicsError(f"nucleus index {nucleus} out of range")
    factor = math.exp(-((t / cfg.T2_star_n) ** cfg.dephasing_exponent))
    # electron is the most significant bit, nucleus j the next ones in order
    shift = rho.n_nuclei - 1 - nucleus
    bits = (np.arange(rho.dim) >> shift) & 1
    m = rho.matrix.copy()
    m[bits[:, None] != bits[None, :]] *= factor
    return DensityState(m, rho.n_nuclei)
