"""Nuclear spin readout through a narrow-band CnNOTe and repeated electron readout.

The nuclear outcome "B" means the CnNOTe flipped the electron, i.e. the
nucleus sat in the targeted hyperfine branch (|down> for ``nu2``).
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, Sequence, Tuple

import numpy as np
from numpy.polynomial.hermite_e import hermegauss

from gevreg.dynamics import DriveParams, RegisterConfig, drive_propagator
from gevreg.errors import ConfigError, PhysicsError
from gevreg.readout.photon import EmitterState, PhotonModel, readout_batch
from gevreg.readout.ssr import ConfusionMatrix, Outcome, qnd_fidelity, ssr_fidelity
from gevreg.rng import derive_rng
from gevreg.sequences.compiler import compile_sequence, rabi_flip_probability
from gevreg.sequences.pulses import PHASE_Y, PulseSequence, narrowband_detuning
from gevreg.spin_core import ComplexMatrix, DensityState, electron_down_thermal, kron_all

logger = logging.getLogger(__name__)

_BASIS = {"up": 0, "down": 1}

GATE_MODELS = ("selective", "exact")
DETUNING_NODES = 9

# |y> = (|up> + i|down>)/sqrt(2) has <Iy> = +1/2
_PLUS_Y = np.array([1.0, 1.0j]) / math.sqrt(2.0)
_MINUS_Y = np.array([1.0, -1.0j]) / math.sqrt(2.0)


@dataclass(frozen=True)
class BackAction:
    """Flip probabilities of the selective gate for one initial basis state."""

    p_e_flip: float
    p_n_flip: float


def _two_body(cfg: RegisterConfig, nucleus: int) -> RegisterConfig:
    if not 0 <= nucleus < cfg.n_nuclei:
        raise PhysicsError(f"nucleus index {nucleus} out of range")
    return cfg.with_nuclei((cfg.nuclei[nucleus],))


def selective_gate(cfg: RegisterConfig, rabi: float, nucleus: int = 0, target: str = "nu2", detuning_offset: float = 0.0) -> ComplexMatrix:
    """Two-body propagator of the rectangular hyperfine-selective pi pulse (theta = 0).

    ``detuning_offset`` (Hz) shifts the drive away from the targeted line.
    """
    if not rabi > 0:
        raise ConfigError("rabi frequency must be positive")
    pair = _two_body(cfg, nucleus)
    drive = DriveParams(rabi, PHASE_Y, narrowband_detuning(pair, target) + detuning_offset, 1.0 / (2.0 * rabi))
    return drive_propagator(pair, drive)


def transition_matrix(cfg: RegisterConfig, rabi: float, nucleus: int = 0, target: str = "nu2", detuning_offset: float = 0.0) -> np.ndarray:
    """``|U_fi|^2`` of the selective gate over the basis |e n>, index = 2 e + n (0 = up)."""
    u = selective_gate(cfg, rabi, nucleus, target, detuning_offset)
    return np.abs(u) ** 2


def selective_transition_matrix(cfg: RegisterConfig, rabi: float, nucleus: int = 0, target: str = "nu2", detuning_offset: float = 0.0) -> np.ndarray:
    """Electron-flip table of the selective gate in the secular two-level picture.

    The nucleus keeps its state; the electron line of nuclear state ``n``
    sits at ``narrowband_detuning(n)`` and flips with the closed-form
    generalized-Rabi probability. Same indexing as :func:`transition_matrix`.
    """
    if not rabi > 0:
        raise ConfigError("rabi frequency must be positive")
    pair = _two_body(cfg, nucleus)
    drive = narrowband_detuning(pair, target) + detuning_offset
    table = np.zeros((4, 4))
    for n, line in enumerate((narrowband_detuning(pair, "nu1"), narrowband_detuning(pair, "nu2"))):
        p = rabi_flip_probability(rabi, drive - line, 1.0 / (2.0 * rabi))
        for e in (0, 1):
            table[2 * e + n, 2 * e + n] = 1.0 - p
            table[2 * (1 - e) + n, 2 * e + n] = p
    return table


def detuning_spread(cfg: RegisterConfig) -> float:
    """Standard deviation (Hz) of the quasi-static electron detuning behind ``T2_star_e``.

    A Gaussian detuning of width ``sigma`` gives the coherence decay
    ``exp(-(t / T2*)^2)`` with ``sigma = 1 / (sqrt(2) pi T2*)``.
    """
    if cfg.T2_star_e is None:
        return 0.0
    return 1.0 / (math.sqrt(2.0) * math.pi * cfg.T2_star_e)


def back_action_probabilities(cfg: RegisterConfig, rabi: float, initial: Tuple[str, str] = ("down", "down"), nucleus: int = 0) -> BackAction:
    """Electron and nuclear flip probabilities of the selective gate.

    The gate drives the |down_e down_n> line (detuning ``A_zz/2``, ``theta = 0``)
    for ``1/(2 rabi)`` seconds; the nucleus' transverse coupling is kept.

    Args:
        cfg (RegisterConfig): Register; only ``nucleus`` is simulated.
        rabi (float): Rabi frequency in Hz.
        initial (tuple): ("up"|"down", "up"|"down") for electron and nucleus.
        nucleus (int): Index of the nucleus.

    Returns:
        BackAction: Probability that the electron and the nucleus changed state.
    """
    try:
        e0, n0 = (_BASIS[s] for s in initial)
    except KeyError as exc:
        raise ConfigError(f"unknown basis label {exc.args[0]!r}") from None
    probs = transition_matrix(cfg, rabi, nucleus)[:, 2 * e0 + n0]
    p_e = sum(probs[2 * e + n] for e in (0, 1) for n in (0, 1) if e != e0)
    p_n = sum(probs[2 * e + n] for e in (0, 1) for n in (0, 1) if n != n0)
    return BackAction(float(p_e), float(p_n))


def mbi_project(outcome: Outcome) -> ComplexMatrix:
    """Nuclear state heralded by measurement-based initialization: D gives |y>, B gives |-y>."""
    outcome = Outcome(outcome)
    if outcome is Outcome.REJECTED:
        raise ConfigError("MBI needs a B or D outcome")
    psi = _PLUS_Y if outcome is Outcome.DARK else _MINUS_Y
    return np.outer(psi, psi.conj())


def mbi_postselect(cfg: RegisterConfig, seq: PulseSequence, outcome: Outcome, ideal_pulses: bool = True) -> Tuple[float, DensityState]:
    """Run ``seq`` on |down_e> (x) thermal nuclei and post-select the electron readout.

    Returns:
        tuple: Probability of ``outcome`` and the conditional register state.
    """
    rho = electron_down_thermal(cfg.n_nuclei).evolve(compile_sequence(seq, cfg, ideal_pulses))
    return rho.project_electron(up=Outcome(outcome) is Outcome.BRIGHT)


def fidelity_to_pure(rho: ComplexMatrix, psi: np.ndarray) -> float:
    return float(np.real(psi.conj() @ rho @ psi))


@dataclass(frozen=True)
class NuclearSsrParams:
    """Nuclear readout protocol.

    Attributes:
        rabi (float): Rabi frequency of the selective gate in Hz.
        n_reads (int): Gate plus electron readout repetitions per nuclear readout.
        threshold (int): Threshold on the accumulated photon count.
        init_fidelity_n (float): Probability the nucleus starts in the prepared state.
        nucleus (int): Index of the read nucleus.
        gate_model (str): ``selective`` flips the electron with the secular
            two-level probabilities and adds nuclear jumps with the exact
            two-body back-action of the targeted state; ``exact`` samples the
            full two-body transition table in the z basis.
    """

    rabi: float = 765e3
    n_reads: int = 2
    threshold: int = 2
    init_fidelity_n: float = 0.95
    nucleus: int = 0
    gate_model: str = "selective"

    def __post_init__(self):
        if not self.rabi > 0:
            raise ConfigError("rabi must be positive")
        if self.n_reads < 1 or self.threshold < 1:
            raise ConfigError("n_reads and threshold must be at least 1")
        if not 0.0 <= self.init_fidelity_n <= 1.0:
            raise ConfigError("init_fidelity_n must be a probability")
        if self.gate_model not in GATE_MODELS:
            raise ConfigError(f"gate_model must be one of {', '.join(GATE_MODELS)}")


@dataclass
class NuclearSsrResult:
    confusion: ConfusionMatrix
    qnd: Tuple[float, float]
    params: NuclearSsrParams

    @property
    def fidelity(self) -> float:
        return ssr_fidelity(self.confusion)

    @property
    def qnd_fidelity(self) -> float:
        return qnd_fidelity(*self.qnd)


def _gate_tables(cfg: RegisterConfig, params: NuclearSsrParams) -> Tuple[np.ndarray, np.ndarray]:
    """Gate tables on a Gauss-Hermite grid of quasi-static detunings.

    Returns:
        tuple: Tables of shape ``(nodes, 4, 4)`` and the node weights.
    """
    sigma = detuning_spread(cfg)
    if sigma > 0:
        nodes, weights = hermegauss(DETUNING_NODES)
        weights = weights / weights.sum()
    else:
        nodes, weights = np.zeros(1), np.ones(1)
    build = selective_transition_matrix if params.gate_model == "selective" else transition_matrix
    tables = np.stack([build(cfg, params.rabi, params.nucleus, detuning_offset=sigma * x) for x in nodes])
    return tables, weights


def nuclear_jump_probability(cfg: RegisterConfig, params: NuclearSsrParams) -> float:
    """Nuclear flip probability per electron excursion to |up>.

    Taken from the exact two-body gate acting on the targeted state; the
    ``exact`` gate model carries its back-action in the table instead.
    """
    if params.gate_model == "exact":
        return 0.0
    return back_action_probabilities(cfg, params.rabi, ("down", "down"), params.nucleus).p_n_flip


def _sample_reads(cfg: RegisterConfig, model: PhotonModel, params: NuclearSsrParams, nuclear: np.ndarray, n_reads: int, rng) -> Tuple[np.ndarray, np.ndarray]:
    """Counts of ``n_reads`` consecutive gate + readout cycles.

    Every read draws a fresh electron initialization and a fresh quasi-static
    detuning. A read that leaves the electron in |up>, or started there,
    returns it to |down> through the readout and flips the nucleus with the
    jump probability.

    Args:
        nuclear (np.ndarray): Nuclear basis index per shot (0 up, 1 down).

    Returns:
        tuple: Counts of shape ``(shots, n_reads)`` and the final nuclear states.
    """
    tables, weights = _gate_tables(cfg, params)
    cumulative = np.cumsum(tables, axis=1)
    jump = nuclear_jump_probability(cfg, params)
    n = nuclear.size
    counts = np.zeros((n, n_reads), dtype=int)
    for k in range(n_reads):
        electron = np.where(rng.random(n) < model.init_fidelity_e, 1, 0)
        node = rng.choice(weights.size, size=n, p=weights)
        column = 2 * electron + nuclear
        u = rng.random(n)[:, None]
        final = np.minimum(np.sum(u > cumulative[node, :, column], axis=1), 3)
        excursion = (electron == 0) | (final // 2 == 0)
        electron, nuclear = final // 2, final % 2
        jumped = excursion & (rng.random(n) < jump)
        nuclear = np.where(jumped, 1 - nuclear, nuclear)
        emitter = np.where(electron == 0, int(EmitterState.BRIGHT), int(EmitterState.DARK))
        counts[:, k], _ = readout_batch(emitter, model, rng)
    return counts, nuclear


def _prepare(prepared_down: bool, n: int, init_fidelity: float, rng) -> np.ndarray:
    target = 1 if prepared_down else 0
    correct = rng.random(n) < init_fidelity
    return np.where(correct, target, 1 - target)


def _simulate_counts(cfg, model, params, shots, n_reads, seed, blocks=1) -> Dict[bool, np.ndarray]:
    """Per-read counts for both preparations, shape ``(shots, blocks * n_reads)``."""
    out = {}
    for index, prepared_down in enumerate((True, False)):
        rng = derive_rng(seed, index)
        nuclear = _prepare(prepared_down, shots, params.init_fidelity_n, rng)
        counts, _ = _sample_reads(cfg, model, params, nuclear, blocks * n_reads, rng)
        out[prepared_down] = counts
    return out


def _confusion(totals: Dict[bool, np.ndarray], threshold: int) -> ConfusionMatrix:
    b_on_b = int(np.sum(totals[True] >= threshold))
    b_on_d = int(np.sum(totals[False] >= threshold))
    return ConfusionMatrix.from_counts(b_on_b, totals[True].size - b_on_b, b_on_d, totals[False].size - b_on_d)


def run_nuclear_ssr(cfg: RegisterConfig, model: PhotonModel, params: NuclearSsrParams = None, shots: int = 10000, seed: int = 0) -> NuclearSsrResult:
    """Monte-Carlo nuclear single-shot readout with a QND estimate.

    The nucleus is prepared in |down> (B) or |up> (D) with ``init_fidelity_n``.
    Each read re-initializes the electron, applies the selective gate under a
    quasi-static detuning drawn from ``T2_star_e``, lets the nucleus jump on
    electron excursions and reads the electron. Two consecutive blocks of ``n_reads`` reads give
    the QND estimate.
    """
    if shots < 1:
        raise ConfigError("shots must be at least 1")
    params = params or NuclearSsrParams()
    counts = _simulate_counts(cfg, model, params, shots, params.n_reads, seed, blocks=2)
    first = {k: v[:, : params.n_reads].sum(axis=1) for k, v in counts.items()}
    second = {k: v[:, params.n_reads :].sum(axis=1) for k, v in counts.items()}
    cm = _confusion(first, params.threshold)

    b1 = np.concatenate([first[True], first[False]]) >= params.threshold
    b2 = np.concatenate([second[True], second[False]]) >= params.threshold
    p_bb = float(np.mean(b2[b1])) if b1.any() else math.nan
    p_dd = float(np.mean(~b2[~b1])) if (~b1).any() else math.nan
    result = NuclearSsrResult(cm, (p_bb, p_dd), params)
    logger.info("nuclear SSR at %.1f kHz: F=%.4f", params.rabi / 1e3, result.fidelity)
    return result


def rabi_sweep(cfg: RegisterConfig, model: PhotonModel, rabi_grid: Sequence[float], params: NuclearSsrParams = None, shots: int = 10000, seed: int = 0) -> np.ndarray:
    """Average nuclear readout fidelity for every Rabi frequency of the grid.

    All grid points reuse the same random stream so neighbouring points differ
    only through the gate.
    """
    params = params or NuclearSsrParams()
    fidelities = []
    for rabi in rabi_grid:
        point = replace(params, rabi=rabi)
        counts = _simulate_counts(cfg, model, point, shots, point.n_reads, seed)
        totals = {k: v.sum(axis=1) for k, v in counts.items()}
        fidelities.append(ssr_fidelity(_confusion(totals, point.threshold)))
        logger.debug("rabi %.1f kHz -> %.4f", rabi / 1e3, fidelities[-1])
    return np.array(fidelities)


def reads_threshold_grid(
    cfg: RegisterConfig, model: PhotonModel, reads_grid: Sequence[int], threshold_grid: Sequence[int], params: NuclearSsrParams = None, shots: int = 10000, seed: int = 0
) -> np.ndarray:
    """Fidelity for every (number of reads, accumulated threshold) pair.

    One simulation with the largest number of reads is shared by all cells;
    the first ``n`` reads of a shot are a valid ``n``-read experiment.

    Returns:
        np.ndarray: Shape ``(len(reads_grid), len(threshold_grid))``.
    """
    params = params or NuclearSsrParams()
    if min(reads_grid) < 1 or min(threshold_grid) < 1:
        raise ConfigError("reads and thresholds must be at least 1")
    counts = _simulate_counts(cfg, model, params, shots, max(reads_grid), seed)
    cumulative = {k: np.cumsum(v, axis=1) for k, v in counts.items()}
    grid = np.zeros((len(reads_grid), len(threshold_grid)))
    for i, n_reads in enumerate(reads_grid):
        totals = {k: v[:, n_reads - 1] for k, v in cumulative.items()}
        for j, threshold in enumerate(threshold_grid):
            grid[i, j] = ssr_fidelity(_confusion(totals, threshold))
    return grid


def best_cell(grid: np.ndarray, reads_grid: Sequence[int], threshold_grid: Sequence[int]) -> Tuple[int, int]:
    i, j = np.unravel_index(int(np.argmax(grid)), grid.shape)
    return int(reads_grid[i]), int(threshold_grid[j])


def repetitions_curve(cfg: RegisterConfig, model: PhotonModel, max_reads: int, params: NuclearSsrParams = None, shots: int = 10000, seed: int = 0) -> np.ndarray:
    """Best-threshold fidelity for 1..``max_reads`` repetitions."""
    reads = list(range(1, max_reads + 1))
    thresholds = list(range(1, 4 * max_reads + 1))
    grid = reads_threshold_grid(cfg, model, reads, thresholds, params, shots, seed)
    return grid.max(axis=1)


def product_basis_state(electron: str, nucleus: str) -> np.ndarray:
    """State vector |e n> of a two-body register."""
    vectors = {"up": np.array([1, 0], dtype=complex), "down": np.array([0, 1], dtype=complex)}
    return kron_all(vectors[electron], vectors[nucleus])
