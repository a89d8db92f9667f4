"""Structured text form of pulse sequences.

A sequence is written as a YAML mapping with a ``label`` and an ``elements``
list; each element carries ``kind``, ``duration_s`` and, for drives,
``rabi_hz``, ``phase_rad`` and ``detuning_hz``.
"""

import yaml

from gevreg.dynamics import DriveParams
from gevreg.errors import SequenceError
from gevreg.sequences.pulses import ElementKind, PulseElement, PulseSequence


def sequence_to_dict(seq: PulseSequence) -> dict:
    elements = []
    for e in seq.elements:
        item = {"kind": e.kind.value, "duration_s": float(e.duration)}
        if e.drive is not None:
            item.update(rabi_hz=float(e.drive.rabi), phase_rad=float(e.drive.phase), detuning_hz=float(e.drive.detuning))
        elements.append(item)
    return {"label": seq.label, "elements": elements}


def sequence_from_dict(data: dict) -> PulseSequence:
    try:
        elements = []
        for item in data["elements"]:
            kind = ElementKind(item["kind"])
            duration = float(item["duration_s"])
            drive = None
            if kind is ElementKind.DRIVE:
                drive = DriveParams(
                    rabi=float(item["rabi_hz"]),
                    phase=float(item.get("phase_rad", 0.0)),
                    detuning=float(item.get("detuning_hz", 0.0)),
                    duration=duration,
                )
            elements.append(PulseElement(kind, duration, drive))
    except (KeyError, TypeError, ValueError) as e:
        raise SequenceError(f"invalid sequence description: {e}") from e
    return PulseSequence(tuple(elements), str(data.get("label", "")))


def dumps(seq: PulseSequence) -> str:
    return yaml.safe_dump(sequence_to_dict(seq), sort_keys=False)


def loads(text: str) -> PulseSequence:
    data = yaml.safe_load(text)
    if not isinstance(data, dict):
        raise SequenceError("sequence text must hold a mapping")
    return sequence_from_dict(data)
