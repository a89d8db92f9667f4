"""Single-shot readout of the electron: classification, fidelities and the SSR experiment."""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, List, Tuple

import numpy as np
from scipy import stats

from gevreg.constants import ROW_SUM_TOL
from gevreg.dynamics import RegisterConfig
from gevreg.errors import ConfigError
from gevreg.readout.photon import BlinkRates, EmitterState, PhotonModel, as_rng, readout_batch
from gevreg.rng import derive_rng
from gevreg.sequences.compiler import preparation_fidelity
from gevreg.sequences.pulses import PulseSequence, pi_pulse, u5b_inversion

logger = logging.getLogger(__name__)

CHUNK_SHOTS = 65536


class Outcome(Enum):
    BRIGHT = "B"
    DARK = "D"
    REJECTED = "rejected"


class AnticorrMode(Enum):
    """Which observed outcomes are followed by an inversion and an anti-correlated re-readout."""

    OFF = "off"
    D_ONLY = "d_only"
    BOTH = "both"


def classify(counts, threshold: int):
    """B iff ``counts >= threshold``; works on scalars and arrays.

    Raises:
        ConfigError: If ``threshold < 1``.
    """
    if threshold < 1:
        raise ConfigError("photon threshold must be at least 1")
    if np.ndim(counts) == 0:
        return Outcome.BRIGHT if counts >= threshold else Outcome.DARK
    return np.asarray(counts) >= threshold


@dataclass(frozen=True)
class ConfusionMatrix:
    """Conditional readout probabilities P(result | prepared).

    Attributes:
        p_b_given_b (float): Prepared B, read B.
        p_d_given_b (float): Prepared B, read D.
        p_b_given_d (float): Prepared D, read B.
        p_d_given_d (float): Prepared D, read D.
        shots (tuple): Accepted shot counts ``(n_bb, n_db, n_bd, n_dd)``.
    """

    p_b_given_b: float
    p_d_given_b: float
    p_b_given_d: float
    p_d_given_d: float
    shots: Tuple[int, int, int, int] = (0, 0, 0, 0)

    def __post_init__(self):
        for row in ((self.p_b_given_b, self.p_d_given_b), (self.p_b_given_d, self.p_d_given_d)):
            if any(math.isnan(p) for p in row):
                continue
            if any(p < 0 or p > 1 for p in row) or abs(sum(row) - 1.0) > ROW_SUM_TOL:
                raise ConfigError("confusion matrix rows must be probabilities summing to 1")

    @classmethod
    def from_counts(cls, n_bb: int, n_db: int, n_bd: int, n_dd: int) -> "ConfusionMatrix":
        """Build from accepted shot counts; a row without shots becomes NaN."""

        def _row(n_hit, n_miss):
            total = n_hit + n_miss
            if total == 0:
                return math.nan, math.nan
            return n_hit / total, n_miss / total

        p_bb, p_db = _row(n_bb, n_db)
        p_dd, p_bd = _row(n_dd, n_bd)
        return cls(p_bb, p_db, p_bd, p_dd, (int(n_bb), int(n_db), int(n_bd), int(n_dd)))

    @property
    def shots_b(self) -> int:
        return self.shots[0] + self.shots[1]

    @property
    def shots_d(self) -> int:
        return self.shots[2] + self.shots[3]


def ssr_fidelity(cm: ConfusionMatrix) -> float:
    """Average readout fidelity ``1 - P(B|D)/2 - P(D|B)/2``."""
    return 1.0 - 0.5 * cm.p_b_given_d - 0.5 * cm.p_d_given_b


def qnd_fidelity(p_b2_given_b1: float, p_d2_given_d1: float) -> float:
    """Probability that a second readout repeats the first, averaged over outcomes."""
    for p in (p_b2_given_b1, p_d2_given_d1):
        if not 0.0 <= p <= 1.0:
            raise ConfigError("QND inputs must be probabilities")
    return 0.5 * (p_b2_given_b1 + p_d2_given_d1)


def binomial_stderr(p: float, n: int) -> float:
    if n <= 0 or math.isnan(p):
        return math.nan
    return math.sqrt(p * (1.0 - p) / n)


def ssr_fidelity_stderr(cm: ConfusionMatrix) -> float:
    """Standard error of :func:`ssr_fidelity` from the binomial errors of both rows."""
    var_b = binomial_stderr(cm.p_d_given_b, cm.shots_b) ** 2
    var_d = binomial_stderr(cm.p_b_given_d, cm.shots_d) ** 2
    return 0.5 * math.sqrt(var_b + var_d)


def poisson_threshold_fidelity(model: PhotonModel, threshold: int) -> float:
    """Closed-form fidelity of an ideal Poisson readout (no flips, no blinking, perfect init)."""
    if threshold < 1:
        raise ConfigError("photon threshold must be at least 1")
    p_b_given_d = stats.poisson.sf(threshold - 1, model.n_dark_mean)
    p_d_given_b = stats.poisson.cdf(threshold - 1, model.n_bright_mean)
    return float(1.0 - 0.5 * p_b_given_d - 0.5 * p_d_given_b)


@dataclass(frozen=True)
class SsrOptions:
    """Protocol switches of the electron SSR experiment.

    Attributes:
        use_composite (bool): Prepare B with U5b instead of a single pi pulse.
        anticorr (AnticorrMode): Anti-correlation check mode.
        threshold (int): Photon threshold of a single readout.
        pi_rabi (float): Rabi frequency of the single pi pulse in Hz.
        composite_rabi (float): Rabi frequency of the U5b pulses in Hz.
        qnd_readout (bool): Take a second readout right after the first to estimate QND fidelity.
    """

    use_composite: bool = False
    anticorr: AnticorrMode = AnticorrMode.OFF
    threshold: int = 1
    pi_rabi: float = 7.65e6
    composite_rabi: float = 4.0e6
    qnd_readout: bool = False

    def __post_init__(self):
        object.__setattr__(self, "anticorr", AnticorrMode(self.anticorr))
        if self.threshold < 1:
            raise ConfigError("threshold must be at least 1")
        if not (self.pi_rabi > 0 and self.composite_rabi > 0):
            raise ConfigError("Rabi frequencies must be positive")

    def preparation_sequence(self) -> PulseSequence:
        if self.use_composite:
            return u5b_inversion(self.composite_rabi)
        return PulseSequence((pi_pulse(self.pi_rabi),), "pi")


@dataclass(frozen=True)
class ReadoutRecord:
    prepared: Outcome
    counts_sequence: Tuple[int, ...]
    classified: Outcome


@dataclass
class SsrResult:
    """Outcome of :func:`run_ssr_experiment`.

    ``counts`` has one column per readout slot (first readout, optional QND
    readout, anti-correlation re-readout); unused slots hold -1.
    """

    confusion: ConfusionMatrix
    rejected: Tuple[int, int]
    shots: int
    transfer_fidelity: float
    prepared: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)
    outcomes: np.ndarray = field(repr=False)
    qnd: Tuple[float, float] = (math.nan, math.nan)

    @property
    def fidelity(self) -> float:
        return ssr_fidelity(self.confusion)

    @property
    def fidelity_stderr(self) -> float:
        return ssr_fidelity_stderr(self.confusion)

    @property
    def rejection_rates(self) -> Tuple[float, float]:
        """Rejected fraction of B-prepared and D-prepared shots."""
        return self.rejected[0] / self.shots, self.rejected[1] / self.shots

    @property
    def qnd_fidelity(self) -> float:
        if any(math.isnan(p) for p in self.qnd):
            return math.nan
        return qnd_fidelity(*self.qnd)

    def records(self) -> Iterator[ReadoutRecord]:
        for prep, row, out in zip(self.prepared, self.counts, self.outcomes):
            yield ReadoutRecord(Outcome(prep), tuple(int(c) for c in row if c >= 0), Outcome(out))


def _advance_optical(off: np.ndarray, blink: BlinkRates, t: float, rng: np.random.Generator) -> np.ndarray:
    """Two-state Markov update of the 'off' flags over ``t`` seconds."""
    p_if_on = blink.off_probability_after(0.0, t)
    p_if_off = blink.off_probability_after(1.0, t)
    u = rng.random(off.size)
    return np.where(off, u < p_if_off, u < p_if_on)


def _read(spin: np.ndarray, off: np.ndarray, model: PhotonModel, rng: np.random.Generator):
    """One readout of the spin (BRIGHT/DARK codes) through the optical state."""
    emitter = np.where(off, int(EmitterState.OFF), spin)
    counts, after = readout_batch(emitter, model, rng)
    spin = np.where(off, spin, after)
    if model.blink is not None:
        off = _advance_optical(off, model.blink, model.readout_duration, rng)
    return counts, spin, off


def _flip(spin: np.ndarray, probability: float, rng: np.random.Generator) -> np.ndarray:
    flipped = rng.random(spin.size) < probability
    return np.where(flipped, 1 - spin, spin)


def _run_chunk(prepared: Outcome, n: int, transfer: float, model: PhotonModel, options: SsrOptions, rng):
    bright, dark = int(EmitterState.BRIGHT), int(EmitterState.DARK)
    spin = np.where(rng.random(n) < model.init_fidelity_e, dark, bright)
    if prepared is Outcome.BRIGHT:
        spin = _flip(spin, transfer, rng)
    if model.blink is not None:
        off = rng.random(n) < model.blink.stationary_off_fraction
    else:
        off = np.zeros(n, dtype=bool)

    counts = np.full((n, 3), -1, dtype=int)
    first, spin, off = _read(spin, off, model, rng)
    counts[:, 0] = first
    is_b = classify(first, options.threshold)
    second_b = None
    if options.qnd_readout:
        second, spin, off = _read(spin, off, model, rng)
        counts[:, 1] = second
        second_b = classify(second, options.threshold)

    outcome = np.where(is_b, Outcome.BRIGHT.value, Outcome.DARK.value).astype(object)
    if options.anticorr is not AnticorrMode.OFF:
        # the check inverts with the preparation pulse and expects the opposite outcome
        checked = np.ones(n, dtype=bool) if options.anticorr is AnticorrMode.BOTH else ~is_b
        spin = _flip(spin, transfer, rng)
        again, spin, off = _read(spin, off, model, rng)
        counts[:, 2] = np.where(checked, again, -1)
        failed = checked & (classify(again, options.threshold) == is_b)
        outcome[failed] = Outcome.REJECTED.value
    return counts, outcome, is_b, second_b


def run_ssr_experiment(cfg: RegisterConfig, model: PhotonModel, shots: int, options: SsrOptions = None, seed: int = 0) -> SsrResult:
    """Monte-Carlo SSR calibration: ``shots`` shots prepared in D and ``shots`` in B.

    Each shot initializes the electron dark with ``init_fidelity_e``, enters
    the blinking telegraph from its stationary distribution, optionally
    prepares B with a pi pulse or U5b (transfer averaged over the hyperfine
    lines of ``cfg``) and is read out. With anti-correlation enabled every
    checked outcome is followed by the same inversion and a re-readout that
    must give the opposite result, otherwise the shot is rejected as
    blinking. ``d_only`` checks D outcomes, ``both`` checks every outcome.

    Args:
        cfg (RegisterConfig): Register, sets the hyperfine-split lines.
        model (PhotonModel): Photon statistics.
        shots (int): Shots per prepared state.
        options (SsrOptions, optional): Protocol switches.
        seed (int): Experiment seed.

    Returns:
        SsrResult: Confusion matrix of accepted shots, rejection counts and per-shot data.

    Raises:
        ConfigError: If ``shots < 1``.
    """
    if shots < 1:
        raise ConfigError("shots must be at least 1")
    options = options or SsrOptions()
    transfer = preparation_fidelity(options.preparation_sequence(), cfg)
    logger.info("SSR experiment: %d shots per state, transfer %.4f, anticorr %s", shots, transfer, options.anticorr.value)

    prepared_all: List[np.ndarray] = []
    counts_all: List[np.ndarray] = []
    outcomes_all: List[np.ndarray] = []
    qnd_hits = {Outcome.BRIGHT: [0, 0], Outcome.DARK: [0, 0]}
    for prep_index, prepared in enumerate((Outcome.BRIGHT, Outcome.DARK)):
        for chunk, start in enumerate(range(0, shots, CHUNK_SHOTS)):
            n = min(CHUNK_SHOTS, shots - start)
            rng = derive_rng(seed, prep_index, chunk)
            counts, outcome, first_b, second_b = _run_chunk(prepared, n, transfer, model, options, rng)
            prepared_all.append(np.full(n, prepared.value, dtype=object))
            counts_all.append(counts)
            outcomes_all.append(outcome)
            if second_b is not None:
                qnd_hits[Outcome.BRIGHT][0] += int(np.sum(first_b & second_b))
                qnd_hits[Outcome.BRIGHT][1] += int(np.sum(first_b))
                qnd_hits[Outcome.DARK][0] += int(np.sum(~first_b & ~second_b))
                qnd_hits[Outcome.DARK][1] += int(np.sum(~first_b))
            logger.debug("prep %s chunk %d done", prepared.value, chunk)

    prepared_arr = np.concatenate(prepared_all)
    outcomes = np.concatenate(outcomes_all)

    def _n(prep, out):
        return int(np.sum((prepared_arr == prep.value) & (outcomes == out.value)))

    cm = ConfusionMatrix.from_counts(
        _n(Outcome.BRIGHT, Outcome.BRIGHT),
        _n(Outcome.BRIGHT, Outcome.DARK),
        _n(Outcome.DARK, Outcome.BRIGHT),
        _n(Outcome.DARK, Outcome.DARK),
    )
    rejected = (_n(Outcome.BRIGHT, Outcome.REJECTED), _n(Outcome.DARK, Outcome.REJECTED))
    qnd = (math.nan, math.nan)
    if options.qnd_readout:
        qnd = tuple(h / t if t else math.nan for h, t in (qnd_hits[Outcome.BRIGHT], qnd_hits[Outcome.DARK]))
    result = SsrResult(cm, rejected, shots, transfer, prepared_arr, np.concatenate(counts_all), outcomes, qnd)
    logger.info("SSR fidelity %.4f +- %.4f, rejected B %d D %d", result.fidelity, result.fidelity_stderr, *rejected)
    return result


def repeated_readout(states, n_reads: int, total_threshold: int, model: PhotonModel, rng) -> Tuple[np.ndarray, np.ndarray]:
    """Accumulate counts over ``n_reads`` readout gates and classify on the total.

    Args:
        states: EmitterState values per shot.
        n_reads (int): Consecutive readouts.
        total_threshold (int): Threshold on the accumulated counts.
        model (PhotonModel): Photon statistics; spin flips persist between reads.
        rng: Seed or generator.

    Returns:
        tuple: Boolean B classification and accumulated counts per shot.

    Raises:
        ConfigError: If ``n_reads < 1`` or ``total_threshold < 1``.
    """
    if n_reads < 1:
        raise ConfigError("n_reads must be at least 1")
    if total_threshold < 1:
        raise ConfigError("total_threshold must be at least 1")
    rng = as_rng(rng)
    states = np.asarray(states, dtype=int)
    total = np.zeros(states.size, dtype=int)
    for _ in range(n_reads):
        counts, states = readout_batch(states, model, rng)
        total += counts
    return classify(total, total_threshold), total
