"""Photon emission model of a single optical readout.

The emitter is in one of three states: spin bright, spin dark, or optically
"off" (blinking). Detected counts are Poisson distributed. A bright spin
leaves the cycling transition after an exponential waiting time whose rate is
``lambda_B / (eta chi)``, so on average ``eta chi`` photons are detected
before the spin flips to dark.
"""

import logging
import math
from dataclasses import dataclass
from enum import IntEnum
from typing import List, Optional, Tuple, Union

import numpy as np

from gevreg.errors import ConfigError
from gevreg.rng import derive_rng

logger = logging.getLogger(__name__)

RngLike = Union[int, np.random.Generator]


class EmitterState(IntEnum):
    BRIGHT = 0
    DARK = 1
    OFF = 2


@dataclass(frozen=True)
class BlinkRates:
    """Power-linear telegraph rates of the optical 'on'/'off' switching.

    Attributes:
        grad_on_off (float): Gradient m_on->off in nW/Hz.
        grad_off_on (float): Gradient m_off->on in nW/Hz.
        power (float): Optical power in nW.
    """

    grad_on_off: float
    grad_off_on: float
    power: float

    def __post_init__(self):
        if not (self.grad_on_off > 0 and self.grad_off_on > 0):
            raise ConfigError("blink gradients must be positive")
        if self.power < 0:
            raise ConfigError("optical power must be non-negative")

    @property
    def rate_on_off(self) -> float:
        return self.power / self.grad_on_off

    @property
    def rate_off_on(self) -> float:
        return self.power / self.grad_off_on

    @property
    def stationary_off_fraction(self) -> float:
        """``m_off->on / (m_on->off + m_off->on)``, independent of power."""
        return self.grad_off_on / (self.grad_on_off + self.grad_off_on)

    def at_power(self, power: float) -> "BlinkRates":
        return BlinkRates(self.grad_on_off, self.grad_off_on, power)

    def off_probability_after(self, p_off_start: float, t: float) -> float:
        """Probability of being 'off' after ``t`` seconds of two-state Markov evolution."""
        total = self.rate_on_off + self.rate_off_on
        if total == 0:
            return p_off_start
        pi_off = self.rate_on_off / total
        return pi_off + (p_off_start - pi_off) * math.exp(-total * t)


@dataclass(frozen=True)
class PhotonModel:
    """Detected-photon statistics of one readout.

    Attributes:
        n_bright_mean (float): <n_B>, mean counts of a bright spin without flips.
        n_dark_mean (float): <n_D>, mean counts of a dark spin.
        readout_duration (float): Readout laser duration in seconds.
        cyclicity (float | None): chi; ``None`` disables readout-induced flips.
        collection_efficiency (float): eta.
        dark_count_rate (float): Detector dark counts in Hz.
        init_fidelity_e (float): Probability that optical pumping leaves the electron dark.
        blink (BlinkRates | None): Telegraph blinking, ``None`` disables it.
    """

    n_bright_mean: float = 4.38
    n_dark_mean: float = 0.05
    readout_duration: float = 60e-6
    cyclicity: Optional[float] = None
    collection_efficiency: float = 9e-4
    dark_count_rate: float = 0.0
    init_fidelity_e: float = 1.0
    blink: Optional[BlinkRates] = None

    def __post_init__(self):
        if self.n_bright_mean < 0 or self.n_dark_mean < 0:
            raise ConfigError("mean photon numbers must be non-negative")
        if not self.readout_duration > 0:
            raise ConfigError("readout_duration must be positive")
        if not 0 < self.collection_efficiency <= 1:
            raise ConfigError("collection_efficiency must be in (0, 1]")
        if self.cyclicity is not None and not self.cyclicity > 0:
            raise ConfigError("cyclicity must be positive")
        if self.dark_count_rate < 0:
            raise ConfigError("dark_count_rate must be non-negative")
        if not 0 <= self.init_fidelity_e <= 1:
            raise ConfigError("init_fidelity_e must be a probability")

    @property
    def bright_rate(self) -> float:
        """lambda_B = <n_B> / t_RO in detected photons per second."""
        return self.n_bright_mean / self.readout_duration

    @property
    def flip_rate(self) -> float:
        """Hazard of a readout-induced bright->dark flip, zero without cyclicity."""
        if self.cyclicity is None or math.isinf(self.cyclicity):
            return 0.0
        return self.bright_rate / (self.collection_efficiency * self.cyclicity)

    @property
    def photons_before_flip(self) -> float:
        """Expected detected photons before a spin flip, eta * chi."""
        if self.cyclicity is None:
            return math.inf
        return self.collection_efficiency * self.cyclicity


def as_rng(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return derive_rng(int(rng))


def readout_batch(states: np.ndarray, model: PhotonModel, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Sample one readout for an array of emitter states.

    Args:
        states (np.ndarray): EmitterState values.
        model (PhotonModel): Photon statistics.
        rng (np.random.Generator): Random stream.

    Returns:
        tuple: Detected counts and the emitter states after the readout.
    """
    states = np.asarray(states, dtype=int)
    n = states.size
    t_ro = model.readout_duration
    hazard = model.flip_rate
    if hazard > 0:
        t_flip = rng.exponential(1.0 / hazard, n)
    else:
        t_flip = np.full(n, np.inf)
    t_bright = np.minimum(t_ro, t_flip)
    bright_counts = rng.poisson(model.bright_rate * t_bright) + rng.poisson(model.n_dark_mean * (t_ro - t_bright) / t_ro)
    dark_counts = rng.poisson(model.n_dark_mean, n)
    detector = rng.poisson(model.dark_count_rate * t_ro, n)

    counts = np.where(states == EmitterState.BRIGHT, bright_counts, 0)
    counts = counts + np.where(states == EmitterState.DARK, dark_counts, 0) + detector
    after = states.copy()
    after[(states == EmitterState.BRIGHT) & (t_flip < t_ro)] = EmitterState.DARK
    return counts.astype(int), after


def sample_counts(state: Union[str, EmitterState], model: PhotonModel, rng: RngLike) -> int:
    """Detected photons of a single readout of ``state`` ('bright', 'dark' or 'off')."""
    if isinstance(state, str):
        state = EmitterState[state.upper()]
    counts, _ = readout_batch(np.array([int(state)]), model, as_rng(rng))
    return int(counts[0])


def expected_bright_counts(model: PhotonModel) -> float:
    """Closed-form mean counts of a bright readout including flip truncation."""
    lam, k, t = model.bright_rate, model.flip_rate, model.readout_duration
    if k == 0:
        return lam * t
    mean_t = (1.0 - math.exp(-k * t)) / k
    return lam * mean_t + model.n_dark_mean * (t - mean_t) / t


def estimate_cyclicity(gamma0: float, t_sat: float) -> float:
    """Cyclicity ``chi = gamma0 t_sat / 2`` from the angular linewidth and saturated pumping time."""
    if not (gamma0 > 0 and t_sat > 0):
        raise ConfigError("gamma0 and t_sat must be positive")
    return gamma0 * t_sat / 2.0


def sample_telegraph(rates: BlinkRates, duration: float, rng: RngLike, start: str = None) -> List[Tuple[str, float]]:
    """Alternating 'on'/'off' dwell intervals covering ``duration`` seconds.

    The first state is drawn from the stationary distribution unless ``start``
    is given; the last dwell is truncated at ``duration``.
    """
    rng = as_rng(rng)
    if rates.power == 0:
        return [(start or "on", duration)]
    if start is None:
        start = "off" if rng.random() < rates.stationary_off_fraction else "on"
    intervals = []
    state, elapsed = start, 0.0
    while elapsed < duration:
        rate = rates.rate_on_off if state == "on" else rates.rate_off_on
        dwell = min(rng.exponential(1.0 / rate), duration - elapsed)
        intervals.append((state, dwell))
        elapsed += dwell
        state = "off" if state == "on" else "on"
    return intervals


def telegraph_counts(intervals, bin_width: float, on_rate: float, off_rate: float, rng: RngLike) -> np.ndarray:
    """Poisson photon-count trace of a telegraph, binned at ``bin_width``.

    Args:
        intervals: Output of :func:`sample_telegraph`.
        bin_width (float): Bin width in seconds.
        on_rate (float): Count rate in the 'on' state, Hz.
        off_rate (float): Count rate in the 'off' state, Hz.
        rng: Seed or generator.
    """
    rng = as_rng(rng)
    total = sum(d for _, d in intervals)
    n_bins = int(round(total / bin_width))
    edges = np.arange(n_bins + 1) * bin_width
    dwells = np.array([d for _, d in intervals])
    is_on = np.array([s == "on" for s, _ in intervals], dtype=float)
    starts = np.concatenate([[0.0], np.cumsum(dwells)[:-1]])
    on_before = np.concatenate([[0.0], np.cumsum(dwells * is_on)[:-1]])
    # cumulative on-time evaluated at every bin edge
    idx = np.clip(np.searchsorted(starts, edges, side="right") - 1, 0, len(dwells) - 1)
    cumulative = on_before[idx] + np.minimum(edges - starts[idx], dwells[idx]) * is_on[idx]
    on_time = np.diff(cumulative)
    mean = on_rate * on_time + off_rate * (bin_width - on_time)
    return rng.poisson(mean)
