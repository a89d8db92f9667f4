"""Photon-count readout of the electron and, through it, of the nuclei."""

from gevreg.readout.nuclear import (
    BackAction,
    NuclearSsrParams,
    back_action_probabilities,
    mbi_postselect,
    mbi_project,
    reads_threshold_grid,
    repetitions_curve,
    rabi_sweep,
    run_nuclear_ssr,
)
from gevreg.readout.photon import (
    BlinkRates,
    EmitterState,
    PhotonModel,
    estimate_cyclicity,
    sample_counts,
    sample_telegraph,
)
from gevreg.readout.ssr import (
    AnticorrMode,
    ConfusionMatrix,
    Outcome,
    ReadoutRecord,
    SsrOptions,
    classify,
    poisson_threshold_fidelity,
    qnd_fidelity,
    repeated_readout,
    run_ssr_experiment,
    ssr_fidelity,
)

__all__ = [
    "AnticorrMode",
    "BackAction",
    "BlinkRates",
    "ConfusionMatrix",
    "EmitterState",
    "NuclearSsrParams",
    "Outcome",
    "PhotonModel",
    "ReadoutRecord",
    "SsrOptions",
    "back_action_probabilities",
    "classify",
    "estimate_cyclicity",
    "mbi_postselect",
    "mbi_project",
    "poisson_threshold_fidelity",
    "qnd_fidelity",
    "rabi_sweep",
    "reads_threshold_grid",
    "repeated_readout",
    "repetitions_curve",
    "run_nuclear_ssr",
    "run_ssr_experiment",
    "sample_counts",
    "sample_telegraph",
    "ssr_fidelity",
]
