"""Nuclear Ramsey after measurement-based initialization."""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from gevreg.dynamics import RegisterConfig, apply_nuclear_dephasing, free_propagator, resonant_tau_dd
from gevreg.errors import ConfigError, PhysicsError
from gevreg.readout.photon import EmitterState, PhotonModel, readout_batch
from gevreg.readout.ssr import classify
from gevreg.rng import derive_rng
from gevreg.sequences.compiler import compile_sequence
from gevreg.sequences.pulses import PulseSequence, cnnote_gate, pi_pulse
from gevreg.spin_core import electron_down_thermal

logger = logging.getLogger(__name__)

BRANCHES = ("up", "dn")


@dataclass(frozen=True)
class RamseySignal:
    tau_free: np.ndarray
    signal: np.ndarray
    branch: str
    tau_dd: float
    mbi_probability: float


def simulate_nuclear_ramsey(
    cfg: RegisterConfig,
    electron_branch: str,
    tau_free_grid: Sequence[float],
    tau_dd_shift: float = 0.0,
    order_n: int = 1,
    nucleus: int = 0,
    rabi: float = 7.65e6,
    ideal_pulses: bool = True,
    model: Optional[PhotonModel] = None,
    shots: int = 1000,
    threshold: int = 1,
    seed: int = 0,
) -> RamseySignal:
    """MBI, free nuclear precession with the electron parked in one branch, CnNOTe, readout.

    The CnNOTe blocks use the first XY8 resonance of ``nucleus`` shifted by
    ``tau_dd_shift``. MBI keeps the D outcome of the first readout. During
    the free time the electron sits in |down> ("dn") or, after an ideal pi
    pulse, in |up> ("up"), so the nucleus precesses at the matching
    conditional frequency. With ``T2_star_n`` set the fringes decay as
    ``exp(-(tau/T2*_n)^p)``.

    Args:
        cfg (RegisterConfig): Register.
        electron_branch (str): "up" or "dn".
        tau_free_grid (Sequence[float]): Free precession times in seconds.
        tau_dd_shift (float): Offset added to the resonant tau_dd.
        order_n (int): XY8 order of both CnNOTe blocks.
        nucleus (int): Nucleus the resonance is taken from.
        rabi (float): Rabi frequency of the block pulses in Hz.
        ideal_pulses (bool): Instantaneous block pulses.
        model (PhotonModel, optional): Read the final electron through the photon model.
        shots (int): Shots per point for the photon-model readout.
        threshold (int): Photon threshold for the photon-model readout.
        seed (int): Seed of the photon-model readout.

    Returns:
        RamseySignal: P(up) (or B fraction) per free time.
    """
    if electron_branch not in BRANCHES:
        raise ConfigError(f"electron_branch must be one of {BRANCHES}")
    tau_dd = resonant_tau_dd(cfg, nucleus) + tau_dd_shift
    gate = compile_sequence(cnnote_gate(tau_dd, order_n, rabi), cfg, ideal_pulses)
    flip = compile_sequence(PulseSequence((pi_pulse(rabi),)), cfg, True)

    p_dark, rho_mbi = electron_down_thermal(cfg.n_nuclei).evolve(gate).project_electron(up=False)
    if rho_mbi is None:
        raise PhysicsError("MBI outcome D has zero probability for this configuration")

    grid = np.asarray(tau_free_grid, dtype=float)
    signal = np.empty(grid.size)
    for i, tau in enumerate(grid):
        rho = rho_mbi
        if electron_branch == "up":
            rho = rho.evolve(flip)
        rho = apply_nuclear_dephasing(rho.evolve(free_propagator(cfg, float(tau))), float(tau), cfg, nucleus)
        if electron_branch == "up":
            rho = rho.evolve(flip)
        p_up = rho.evolve(gate).electron_population_up()
        if model is None:
            signal[i] = p_up
            continue
        rng = derive_rng(seed, i)
        up = rng.random(shots) < p_up
        counts, _ = readout_batch(np.where(up, int(EmitterState.BRIGHT), int(EmitterState.DARK)), model, rng)
        signal[i] = float(np.mean(classify(counts, threshold)))
    logger.debug("nuclear Ramsey branch %s, tau_dd %.6g s, MBI probability %.3f", electron_branch, tau_dd, p_dark)
    return RamseySignal(grid, signal, electron_branch, tau_dd, p_dark)
