"""Pulse sequences, composite gates and their compilation to propagators."""

from gevreg.sequences.compiler import (
    compile_sequence,
    evolve_stepwise,
    generalized_rabi,
    inversion_fidelity,
    preparation_fidelity,
    rabi_flip_probability,
    two_level_transfer,
)
from gevreg.sequences.pulses import (
    PHASE_MINUS_X,
    PHASE_X,
    PHASE_Y,
    CompositePhaseSet,
    ElementKind,
    PulseElement,
    PulseSequence,
    cnnote_gate,
    composite_inversion,
    delay,
    half_pi_pulse,
    narrowband_cnnote,
    narrowband_detuning,
    optimal_2pi_rabi,
    pi_pulse,
    projective_marker,
    readout_marker,
    u5b_inversion,
    xy8_block,
    xy8_echo,
)
from gevreg.sequences.serialization import dumps, loads

__all__ = [
    "PHASE_MINUS_X",
    "PHASE_X",
    "PHASE_Y",
    "CompositePhaseSet",
    "ElementKind",
    "PulseElement",
    "PulseSequence",
    "cnnote_gate",
    "compile_sequence",
    "composite_inversion",
    "delay",
    "dumps",
    "evolve_stepwise",
    "generalized_rabi",
    "half_pi_pulse",
    "inversion_fidelity",
    "loads",
    "narrowband_cnnote",
    "narrowband_detuning",
    "optimal_2pi_rabi",
    "pi_pulse",
    "preparation_fidelity",
    "projective_marker",
    "rabi_flip_probability",
    "readout_marker",
    "two_level_transfer",
    "u5b_inversion",
    "xy8_block",
    "xy8_echo",
]
