"""Timeline elements and the gate library (pi, pi/2, XY8-N, U5b, CnNOTe).

Phase labels follow the Hamiltonian convention of :mod:`gevreg.dynamics`:
an "x" pulse has ``theta = pi/2`` (drives Sx) and a "y" pulse has
``theta = 0`` (drives Sy).

XY8 timing: ``tau_dd`` is the free evolution between consecutive pi pulses
and ``tau_dd/2`` precedes the first and follows the last pulse, so the free
evolution of an XY8-N block is ``8 N tau_dd``. With ``center_to_center=True``
the pulse length is subtracted from each gap instead, making ``tau_dd`` the
spacing between pulse centers.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

from gevreg.constants import U5B_PHASES
from gevreg.dynamics import DriveParams, RegisterConfig
from gevreg.errors import SequenceError

PHASE_X = math.pi / 2
PHASE_Y = 0.0
PHASE_MINUS_X = 3 * math.pi / 2
PHASE_MINUS_Y = math.pi

XY8_PATTERN = (PHASE_X, PHASE_Y, PHASE_X, PHASE_Y, PHASE_Y, PHASE_X, PHASE_Y, PHASE_X)


class ElementKind(Enum):
    DRIVE = "drive"
    DELAY = "delay"
    READOUT_MARKER = "readout_marker"
    PROJECTIVE_MARKER = "projective_marker"


@dataclass(frozen=True)
class PulseElement:
    """One piece of a piecewise-constant control timeline.

    Attributes:
        kind (ElementKind): What happens during the element.
        duration (float): Length in seconds.
        drive (DriveParams | None): Drive parameters, only for ``ElementKind.DRIVE``.
    """

    kind: ElementKind
    duration: float = 0.0
    drive: Optional[DriveParams] = None

    def __post_init__(self):
        if self.duration < 0:
            raise SequenceError("element duration must be non-negative")
        if self.kind is ElementKind.DRIVE:
            if self.drive is None:
                raise SequenceError("drive elements need drive parameters")
            if abs(self.drive.duration - self.duration) > 1e-18:
                raise SequenceError("drive duration must equal the element duration")
        elif self.drive is not None:
            raise SequenceError(f"{self.kind.value} elements carry no drive")

    @property
    def rotation_angle(self) -> float:
        """Nominal on-resonance rotation angle of a drive element in radians."""
        if self.kind is not ElementKind.DRIVE:
            return 0.0
        return 2 * math.pi * self.drive.rabi * self.duration


@dataclass(frozen=True)
class PulseSequence:
    """Ordered timeline of elements, applied first to last."""

    elements: Tuple[PulseElement, ...] = field(default_factory=tuple)
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))

    @property
    def total_duration(self) -> float:
        return math.fsum(e.duration for e in self.elements)

    @property
    def free_evolution_time(self) -> float:
        return math.fsum(e.duration for e in self.elements if e.kind is ElementKind.DELAY)

    def drives(self) -> Tuple[PulseElement, ...]:
        return tuple(e for e in self.elements if e.kind is ElementKind.DRIVE)

    def then(self, other: "PulseSequence", label: str = None) -> "PulseSequence":
        """Concatenate ``other`` after this sequence."""
        return PulseSequence(self.elements + other.elements, label if label is not None else self.label)

    def __add__(self, other: "PulseSequence") -> "PulseSequence":
        return self.then(other)

    def __len__(self):
        return len(self.elements)


@dataclass(frozen=True)
class CompositePhaseSet:
    """Phases (radians) of the pi pulses of a composite inversion."""

    phases: Tuple[float, ...] = U5B_PHASES

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))
        if not self.phases:
            raise SequenceError("composite phase set must not be empty")


def _check_rabi(rabi: float):
    if not rabi > 0:
        raise SequenceError("rabi frequency must be positive")


def rotation(rabi: float, angle: float, phase: float, detuning: float = 0.0) -> PulseElement:
    """Rectangular pulse rotating the electron by ``angle`` on resonance."""
    _check_rabi(rabi)
    duration = angle / (2 * math.pi * rabi)
    return PulseElement(ElementKind.DRIVE, duration, DriveParams(rabi, phase, detuning, duration))


def pi_pulse(rabi: float, phase: float = PHASE_X, detuning: float = 0.0) -> PulseElement:
    """Rectangular pi pulse of length ``1/(2 rabi)``.

    Raises:
        SequenceError: If ``rabi <= 0``.
    """
    return rotation(rabi, math.pi, phase, detuning)


def half_pi_pulse(rabi: float, phase: float = PHASE_X, detuning: float = 0.0) -> PulseElement:
    return rotation(rabi, math.pi / 2, phase, detuning)


def delay(duration: float) -> PulseElement:
    return PulseElement(ElementKind.DELAY, duration)


def readout_marker() -> PulseElement:
    return PulseElement(ElementKind.READOUT_MARKER)


def projective_marker() -> PulseElement:
    return PulseElement(ElementKind.PROJECTIVE_MARKER)


def xy8_block(tau_dd: float, order_n: int, rabi: float, center_to_center: bool = False) -> PulseSequence:
    """XY8-N: ``8 N`` pi pulses with phases XYXYYXYX separated by ``tau_dd``.

    Args:
        tau_dd (float): Inter-pulse spacing in seconds.
        order_n (int): Number of XY8 repetitions N.
        rabi (float): Rabi frequency of the pi pulses in Hz.
        center_to_center (bool): Interpret ``tau_dd`` between pulse centers.

    Raises:
        SequenceError: If ``tau_dd`` is not longer than a pi pulse or ``order_n < 1``.
    """
    if order_n < 1:
        raise SequenceError("XY8 order must be at least 1")
    _check_rabi(rabi)
    t_pi = 1.0 / (2 * rabi)
    if not tau_dd > t_pi:
        raise SequenceError(f"tau_dd={tau_dd:g} s is not longer than the pi pulse ({t_pi:g} s)")
    gap = tau_dd - t_pi if center_to_center else tau_dd
    elements = [delay(gap / 2)]
    n_pulses = 8 * order_n
    for k in range(n_pulses):
        elements.append(pi_pulse(rabi, XY8_PATTERN[k % 8]))
        elements.append(delay(gap if k < n_pulses - 1 else gap / 2))
    return PulseSequence(tuple(elements), f"XY8-{order_n}")


def composite_inversion(rabi: float, phases: CompositePhaseSet, detuning: float = 0.0, label: str = "") -> PulseSequence:
    """Consecutive pi pulses with the given phases."""
    return PulseSequence(tuple(pi_pulse(rabi, p, detuning) for p in phases.phases), label)


def u5b_inversion(rabi: float, phases: CompositePhaseSet = None, detuning: float = 0.0) -> PulseSequence:
    """Five-pulse universal composite inversion.

    Raises:
        SequenceError: If the phase set does not hold exactly five phases.
    """
    phases = phases or CompositePhaseSet()
    if len(phases.phases) != 5:
        raise SequenceError(f"U5b needs 5 phases, got {len(phases.phases)}")
    return composite_inversion(rabi, phases, detuning, "U5b")


def cnnote_gate(tau_dd: float, order_n: int, rabi: float, center_to_center: bool = False) -> PulseSequence:
    """Basis-transformed CnNOTe: pi/2 (x), XY8-N, pi/2 (y)."""
    body = xy8_block(tau_dd, order_n, rabi, center_to_center)
    seq = PulseSequence((half_pi_pulse(rabi, PHASE_X),)) + body + PulseSequence((half_pi_pulse(rabi, PHASE_Y),))
    return PulseSequence(seq.elements, f"CnNOTe(XY8-{order_n})")


def xy8_echo(tau_dd: float, order_n: int, rabi: float, center_to_center: bool = False) -> PulseSequence:
    """pi/2 (x), XY8-N, pi/2 (-x): returns |down> to itself unless a nucleus is resonant."""
    body = xy8_block(tau_dd, order_n, rabi, center_to_center)
    seq = PulseSequence((half_pi_pulse(rabi, PHASE_X),)) + body + PulseSequence((half_pi_pulse(rabi, PHASE_MINUS_X),))
    return PulseSequence(seq.elements, f"XY8-{order_n} echo")


def narrowband_detuning(cfg: RegisterConfig, target: str, nucleus: int = 0) -> float:
    """Drive detuning that puts a pulse on one hyperfine line of ``nucleus``.

    ``nu1`` is the electron transition with the nucleus in |up>, ``nu2`` with
    the nucleus in |down>; the shift of the line is ``m A_zz``.
    """
    if cfg.n_nuclei <= nucleus:
        raise SequenceError("narrow-band CnNOTe needs a configured nucleus")
    a_zz = cfg.nuclei[nucleus].A_zz
    if target == "nu1":
        return -0.5 * a_zz
    if target == "nu2":
        return 0.5 * a_zz
    raise SequenceError(f"unknown hyperfine transition {target!r}, expected 'nu1' or 'nu2'")


def narrowband_cnnote(rabi: float, target: str, cfg: RegisterConfig, nucleus: int = 0, phase: float = PHASE_Y) -> PulseSequence:
    """Weak, hyperfine-selective pi pulse on transition ``nu1`` or ``nu2``."""
    element = pi_pulse(rabi, phase, narrowband_detuning(cfg, target, nucleus))
    return PulseSequence((element,), f"CnNOTe({target})")


def optimal_2pi_rabi(delta: float, m: int) -> float:
    """Rabi frequency giving ``m`` full detuned cycles during a resonant pi pulse.

    Solves ``1/(2 Omega) = m / sqrt(Omega^2 + Delta^2)``: ``Omega = Delta / sqrt(4 m^2 - 1)``.

    Raises:
        SequenceError: If ``m < 1`` or ``delta <= 0``.
    """
    if m < 1:
        raise SequenceError("m must be a positive integer")
    if not delta > 0:
        raise SequenceError("delta must be positive")
    return delta / math.sqrt(4 * m * m - 1)
