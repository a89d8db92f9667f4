"""Compile pulse sequences into register propagators."""

import logging
import math
from typing import Dict, Iterable

import numpy as np
import scipy.linalg

from gevreg.constants import TWO_PI
from gevreg.dynamics import RegisterConfig, build_hamiltonian, drive_propagator, electron_operators, free_propagator, hyperfine_detunings
from gevreg.sequences.pulses import ElementKind, PulseElement, PulseSequence
from gevreg.spin_core import ComplexMatrix, DensityState, expm_hermitian, spin_half_operators

logger = logging.getLogger(__name__)


def _ideal_rotation(element: PulseElement, n_nuclei: int) -> ComplexMatrix:
    """Instantaneous electron rotation by the element's nominal angle, hyperfine ignored."""
    sx, sy, _ = electron_operators(n_nuclei)
    phase = element.drive.phase
    generator = math.sin(phase) * sx + math.cos(phase) * sy
    return expm_hermitian(generator, element.rotation_angle)


def element_propagator(element: PulseElement, cfg: RegisterConfig, ideal_pulses: bool = False) -> ComplexMatrix:
    """Propagator of a single element; markers act as identity."""
    if element.kind is ElementKind.DELAY:
        return free_propagator(cfg, element.duration)
    if element.kind is ElementKind.DRIVE:
        if ideal_pulses:
            return _ideal_rotation(element, cfg.n_nuclei)
        return drive_propagator(cfg, element.drive)
    return np.eye(2 ** (1 + cfg.n_nuclei), dtype=complex)


def compile_sequence(seq: PulseSequence, cfg: RegisterConfig, ideal_pulses: bool = False) -> ComplexMatrix:
    """Ordered product ``U_k ... U_2 U_1`` of the element propagators.

    Args:
        seq (PulseSequence): Timeline, first element acts first.
        cfg (RegisterConfig): Register physics.
        ideal_pulses (bool): Replace drive elements by instantaneous electron rotations.

    Returns:
        ComplexMatrix: Unitary of the whole sequence.
    """
    dim = 2 ** (1 + cfg.n_nuclei)
    cache: Dict[PulseElement, ComplexMatrix] = {}
    u = np.eye(dim, dtype=complex)
    for element in seq.elements:
        step = cache.get(element)
        if step is None:
            step = element_propagator(element, cfg, ideal_pulses)
            cache[element] = step
        u = step @ u
    logger.debug("compiled %s: %d elements, %d distinct", seq.label or "sequence", len(seq), len(cache))
    return u


def evolve_stepwise(rho: DensityState, seq: PulseSequence, cfg: RegisterConfig, steps_per_element: int = 8) -> DensityState:
    """Evolve a state slice by slice with Pade exponentials.

    Independent of :func:`compile_sequence` and used to cross-check it.
    """
    m = rho.matrix
    for element in seq.elements:
        if element.kind is ElementKind.READOUT_MARKER or element.kind is ElementKind.PROJECTIVE_MARKER:
            continue
        drive = element.drive if element.kind is ElementKind.DRIVE else None
        h = build_hamiltonian(cfg, drive)
        dt = element.duration / steps_per_element
        step = scipy.linalg.expm(-1j * h * dt)
        for _ in range(steps_per_element):
            m = step @ m @ step.conj().T
    m = 0.5 * (m + m.conj().T)
    return DensityState(m, rho.n_nuclei)


def generalized_rabi(rabi: float, detuning: float) -> float:
    """Generalized Rabi frequency ``sqrt(Omega^2 + Delta^2)`` in Hz."""
    return math.hypot(rabi, detuning)


def rabi_flip_probability(rabi: float, detuning: float, duration: float) -> float:
    """Closed-form two-level flip probability of a rectangular pulse.

    ``P = a sin^2(pi Omega_eff t)`` with amplitude ``a = Omega^2 / (Omega^2 + Delta^2)``.
    """
    omega_eff = generalized_rabi(rabi, detuning)
    if omega_eff == 0:
        return 0.0
    amplitude = rabi**2 / omega_eff**2
    return amplitude * math.sin(math.pi * omega_eff * duration) ** 2


def two_level_propagator(seq: PulseSequence, detuning_offset: float = 0.0) -> ComplexMatrix:
    """Electron-only propagator of ``seq`` with every detuning shifted by ``detuning_offset``."""
    sx, sy, sz = spin_half_operators()
    u = np.eye(2, dtype=complex)
    for element in seq.elements:
        if element.kind is ElementKind.DRIVE:
            d = element.drive
            h = (d.detuning + detuning_offset) * sz + d.rabi * (math.sin(d.phase) * sx + math.cos(d.phase) * sy)
        elif element.kind is ElementKind.DELAY:
            h = detuning_offset * sz
        else:
            continue
        u = expm_hermitian(TWO_PI * h, element.duration) @ u
    return u


def two_level_transfer(seq: PulseSequence, detuning_offset: float = 0.0) -> float:
    """Population transferred from |down> to |up> by ``seq`` at the given detuning."""
    u = two_level_propagator(seq, detuning_offset)
    return float(abs(u[0, 1]) ** 2)


def inversion_fidelity(seq: PulseSequence, detunings: Iterable[float]) -> float:
    """Mean transfer of ``seq`` over a set of transition detunings (Hz)."""
    values = [two_level_transfer(seq, d) for d in detunings]
    return float(np.mean(values))


def preparation_fidelity(seq: PulseSequence, cfg: RegisterConfig) -> float:
    """Mean transfer over the hyperfine-split electron lines of ``cfg``."""
    return inversion_fidelity(seq, hyperfine_detunings(cfg))
