"""Correlation spectroscopy: two conditional rotations separated by a free correlation time."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from gevreg.dynamics import RegisterConfig, apply_dephasing, free_propagator
from gevreg.errors import ConfigError, SequenceError
from gevreg.readout.photon import EmitterState, PhotonModel, readout_batch
from gevreg.readout.ssr import classify
from gevreg.rng import derive_rng
from gevreg.sequences.compiler import compile_sequence
from gevreg.sequences.pulses import PulseSequence, cnnote_gate, projective_marker
from gevreg.spectra.psd import PeakSet, PsdParams, PsdResult, extract_peaks, welch_psd
from gevreg.spin_core import DOWN, DensityState, thermal_nuclei

logger = logging.getLogger(__name__)

MEMORY_MODES = ("memoryless", "memory", "ensemble")


@dataclass(frozen=True)
class CsPlan:
    """Acquisition plan of one correlation-spectroscopy run.

    Attributes:
        tau_dd (float): XY8 spacing of both conditional blocks in seconds.
        order_n (int): XY8 order N of each block.
        tau_grid (tuple): Uniform, ascending correlation times in seconds.
        randomize_tau (bool): Acquire the grid in a shuffled order.
        memory_mode (str): "memoryless" resets the nuclei to thermal for
            every point; "memory" carries the heralded post-measurement nuclear
            state on; "ensemble" carries the outcome-averaged nuclear state on.
        shots_per_point (int): Projective shots per point in memory mode.
        rabi (float): Rabi frequency of the block pulses in Hz.
        ideal_pulses (bool): Instantaneous block pulses.
    """

    tau_dd: float
    order_n: int
    tau_grid: Tuple[float, ...]
    randomize_tau: bool = False
    memory_mode: str = "memoryless"
    shots_per_point: int = 1
    rabi: float = 7.65e6
    ideal_pulses: bool = True

    def __post_init__(self):
        object.__setattr__(self, "tau_grid", tuple(float(t) for t in self.tau_grid))
        if self.memory_mode not in MEMORY_MODES:
            raise ConfigError(f"memory_mode must be one of {MEMORY_MODES}")
        if self.order_n < 1 or self.shots_per_point < 1:
            raise ConfigError("order_n and shots_per_point must be at least 1")
        if len(self.tau_grid) < 8:
            raise ConfigError("tau grid needs at least 8 points")
        steps = np.diff(self.tau_grid)
        if np.any(steps <= 0) or np.max(np.abs(steps - steps[0])) > 1e-6 * steps[0]:
            raise ConfigError("tau grid must be uniform and ascending")

    @classmethod
    def from_range(cls, tau_dd: float, order_n: int, start: float, step: float, count: int, **kwargs) -> "CsPlan":
        return cls(tau_dd, order_n, tuple(start + step * np.arange(count)), **kwargs)

    @property
    def sample_interval(self) -> float:
        return self.tau_grid[1] - self.tau_grid[0]

    def check_against(self, cfg: RegisterConfig):
        """Raise if the grid leaves the window ``T2*_e < tau < T1_e``."""
        if cfg.T2_star_e is not None and self.tau_grid[0] <= cfg.T2_star_e:
            raise SequenceError(f"shortest tau {self.tau_grid[0]:g} s is not longer than T2*_e {cfg.T2_star_e:g} s")
        if cfg.T1_e is not None and self.tau_grid[-1] >= cfg.T1_e:
            raise SequenceError(f"longest tau {self.tau_grid[-1]:g} s is not shorter than T1_e {cfg.T1_e:g} s")


@dataclass
class CsResult:
    tau: np.ndarray
    signal: np.ndarray
    acquisition_order: np.ndarray
    plan: CsPlan = field(repr=False)


def _block(cfg: RegisterConfig, plan: CsPlan, tau_dd: float) -> np.ndarray:
    gate = cnnote_gate(tau_dd, plan.order_n, plan.rabi)
    return compile_sequence(gate, cfg, plan.ideal_pulses)


def _correlate(rho: DensityState, block: np.ndarray, tau: float, cfg: RegisterConfig) -> DensityState:
    rho = rho.evolve(block)
    rho = rho.evolve(free_propagator(cfg, tau))
    if cfg.T2_star_e is not None:
        rho = apply_dephasing(rho, tau, cfg, coherence_time=cfg.T2_star_e)
    return rho.evolve(block)


def _electron_down_with(nuclear: np.ndarray, n_nuclei: int) -> DensityState:
    return DensityState(np.kron(np.outer(DOWN, DOWN.conj()), nuclear), n_nuclei)


def simulate_cs(
    cfg: RegisterConfig, plan: CsPlan, seed: int = 0, model: Optional[PhotonModel] = None, threshold: int = 1, tau_dd: float = None
) -> CsResult:
    """Simulate the CS signal P(up) for every correlation time of ``plan``.

    In memoryless mode the signal is the exact expectation value, or, when a
    photon ``model`` is given, the B fraction of ``shots_per_point`` photon
    readouts. Ensemble mode does the same but starts every point from the
    nuclear state the previous point left behind, averaged over its
    outcomes; this is the mean of many sequential sweeps. In memory mode
    every shot samples a projective electron outcome and the heralded
    nuclear state seeds the next shot. With memory the acquisition order
    matters; ``randomize_tau`` shuffles it and the result
    is re-sorted by tau.

    Args:
        cfg (RegisterConfig): Register.
        plan (CsPlan): Acquisition plan.
        seed (int): Seed of the shot streams, keyed by tau index.
        model (PhotonModel, optional): Route readouts through the photon model.
        threshold (int): Photon threshold used with ``model``.
        tau_dd (float, optional): Override of ``plan.tau_dd`` (used by 2D scans).

    Returns:
        CsResult: Signal sorted by tau plus the order it was acquired in.
    """
    plan.check_against(cfg)
    tau_dd = plan.tau_dd if tau_dd is None else tau_dd
    block = _block(cfg, plan, tau_dd)
    taus = np.asarray(plan.tau_grid)
    order = np.arange(taus.size)
    if plan.randomize_tau:
        order = derive_rng(seed, taus.size).permutation(taus.size)

    signal = np.empty(taus.size)
    nuclear = thermal_nuclei(cfg.n_nuclei)
    for index in order:
        rng = derive_rng(seed, int(index))
        if plan.memory_mode != "memory":
            start = nuclear if plan.memory_mode == "ensemble" else thermal_nuclei(cfg.n_nuclei)
            rho = _correlate(_electron_down_with(start, cfg.n_nuclei), block, taus[index], cfg)
            if plan.memory_mode == "ensemble":
                nuclear = rho.nuclear_reduced()
            p_up = rho.electron_population_up()
            if model is None:
                signal[index] = p_up
            else:
                up = rng.random(plan.shots_per_point) < p_up
                emitter = np.where(up, int(EmitterState.BRIGHT), int(EmitterState.DARK))
                counts, _ = readout_batch(emitter, model, rng)
                signal[index] = float(np.mean(classify(counts, threshold)))
            continue
        hits = 0
        for _ in range(plan.shots_per_point):
            rho = _correlate(_electron_down_with(nuclear, cfg.n_nuclei), block, taus[index], cfg)
            up = bool(rng.random() < rho.electron_population_up())
            _, post = rho.project_electron(up)
            nuclear = post.nuclear_reduced()
            hits += up
        signal[index] = hits / plan.shots_per_point
    logger.debug("CS run: %d points, mode %s, randomized %s", taus.size, plan.memory_mode, plan.randomize_tau)
    return CsResult(taus, signal, order, plan)


def cs_spectrum(result: CsResult, params: PsdParams = None, max_peaks: int = 10, floor_factor: float = 10.0) -> Tuple[PsdResult, PeakSet]:
    """Welch PSD of a CS signal and its peaks."""
    psd = welch_psd(result.signal, result.plan.sample_interval, params)
    return psd, extract_peaks(psd, max_peaks, floor_factor)


@dataclass
class CsRow:
    tau_dd: float
    result: CsResult
    psd: PsdResult
    peaks: PeakSet


def simulate_cs_2d(
    cfg: RegisterConfig,
    tau_dd_grid: Sequence[float],
    plan: CsPlan,
    seed: int = 0,
    params: PsdParams = None,
    threads: int = 1,
    max_peaks: int = 10,
    floor_factor: float = 10.0,
) -> List[CsRow]:
    """One CS run and PSD per tau_dd; rows are evaluated in parallel and returned in grid order."""
    grid = [float(t) for t in tau_dd_grid]
    if not grid:
        raise ConfigError("tau_dd grid must not be empty")

    def _row(item):
        index, tau_dd = item
        result = simulate_cs(cfg, replace(plan, tau_dd=tau_dd), int(derive_rng(seed, index).integers(2**63)))
        psd, peaks = cs_spectrum(result, params, max_peaks, floor_factor)
        logger.debug("row %d (tau_dd %.4g s): %d peaks", index, tau_dd, len(peaks))
        return CsRow(tau_dd, result, psd, peaks)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        return list(pool.map(_row, enumerate(grid)))


def persistent_peaks(rows: List[CsRow], min_rows: int = 2, tolerance_bins: float = 1.0) -> List[float]:
    """Peak frequencies that recur, within ``tolerance_bins``, in at least ``min_rows`` rows."""
    found: List[List[float]] = []
    for row in rows:
        tol = tolerance_bins * row.psd.resolution
        for f in row.peaks.frequencies:
            for group in found:
                if abs(np.mean(group) - f) <= tol:
                    group.append(f)
                    break
            else:
                found.append([f])
    return sorted(float(np.mean(g)) for g in found if len(g) >= min_rows)


def block_sequence(plan: CsPlan) -> PulseSequence:
    """One block of ``plan``: the conditional rotation closed by the projective electron read."""
    return cnnote_gate(plan.tau_dd, plan.order_n, plan.rabi) + PulseSequence((projective_marker(),))
