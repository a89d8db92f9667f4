"""Telegraph ("blinking") analysis of photon-count traces.

Pipeline: segment a binned count trace into 'on'/'off' dwells, histogram
the dwell times per state, fit an exponential to each histogram, and
regress the fitted rates against optical power (``power = m * rate``).
"""

import csv
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import optimize

from gevreg.errors import ConfigError, FitError
from gevreg.readout.photon import BlinkRates, sample_telegraph, telegraph_counts
from gevreg.rng import derive_rng

logger = logging.getLogger(__name__)

Dwell = Tuple[str, float]
STATES = ("on", "off")


@dataclass(frozen=True)
class CountTrace:
    """Binned photon counts.

    Attributes:
        bin_width (float): Bin width in seconds.
        counts (np.ndarray): Counts per bin.
        power (float | None): Optical power in nW.
    """

    bin_width: float
    counts: np.ndarray
    power: Optional[float] = None

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if not self.bin_width > 0:
            raise ConfigError("bin_width must be positive")
        if counts.size == 0:
            raise ConfigError("count trace must not be empty")
        if np.any(counts < 0):
            raise ConfigError("counts must be non-negative")
        object.__setattr__(self, "counts", counts.astype(int))

    @property
    def duration(self) -> float:
        return self.counts.size * self.bin_width


@dataclass(frozen=True)
class DwellHistogram:
    state: str
    bin_edges: np.ndarray
    frequencies: np.ndarray

    @property
    def total(self) -> int:
        return int(np.sum(self.frequencies))


@dataclass(frozen=True)
class RateFit:
    rate: float
    rate_stderr: float
    r_squared: float
    method: str = "log"


@dataclass(frozen=True)
class LinearRateFit:
    """Zero-intercept fit ``power = gradient * rate``; ``r_squared`` is NaN when degenerate."""

    gradient: float
    stderr: float
    r_squared: float

    @property
    def degenerate(self) -> bool:
        return math.isnan(self.r_squared)


def _cluster_means(counts: np.ndarray) -> Tuple[float, float]:
    """Means of the low and high cluster of a two-cluster split."""
    counts = np.asarray(counts, dtype=float)
    lo, hi = counts.min(), counts.max()
    for _ in range(100):
        cut = 0.5 * (lo + hi)
        low, high = counts[counts <= cut], counts[counts > cut]
        new_lo = low.mean() if low.size else lo
        new_hi = high.mean() if high.size else hi
        if new_lo == lo and new_hi == hi:
            break
        lo, hi = new_lo, new_hi
    return float(lo), float(hi)


def default_threshold(counts: np.ndarray) -> float:
    """Half the 'on' mean of a two-cluster split of the counts, at least 0.5."""
    if np.max(counts) == 0:
        return 0.5
    return max(0.5 * _cluster_means(counts)[1], 0.5)


def hysteresis_band(counts: np.ndarray) -> Tuple[float, float]:
    """(leave, enter) thresholds of the 'on' state.

    A bin enters 'on' at the midpoint of the two cluster means and only
    leaves it below the quarter point, far below the Poisson tail of the
    'on' level.
    """
    if np.max(counts) == 0:
        return 0.5, 0.5
    lo, hi = _cluster_means(counts)
    return max(lo + 0.25 * (hi - lo), 0.5), max(lo + 0.5 * (hi - lo), 0.5)


def _hysteresis_flags(counts: np.ndarray, leave: float, enter: float) -> np.ndarray:
    """'on' flags that keep the last decided state while a bin sits inside the band."""
    decided = (counts >= enter) | (counts < leave)
    index = np.where(decided, np.arange(counts.size), -1)
    last = np.maximum.accumulate(index)
    flags = counts >= enter
    return np.where(last >= 0, flags[np.maximum(last, 0)], counts >= 0.5 * (leave + enter))


def _runs(flags: np.ndarray) -> List[Tuple[bool, int]]:
    edges = np.flatnonzero(np.diff(flags.astype(int))) + 1
    starts = np.concatenate([[0], edges])
    ends = np.concatenate([edges, [flags.size]])
    return [(bool(flags[s]), int(e - s)) for s, e in zip(starts, ends)]


def segment_trace(trace: CountTrace, threshold: Union[float, Tuple[float, float]] = None, min_dwell: int = 2) -> List[Dwell]:
    """Split a trace into alternating ('on'|'off', seconds) dwells.

    A single ``threshold`` marks a bin 'on' when its count reaches it. A
    ``(leave, enter)`` pair, and the default :func:`hysteresis_band`, switch
    to 'on' at ``enter`` and back to 'off' below ``leave``. Runs shorter than
    ``min_dwell`` bins take the state of the run before them (the run after
    them for the first run) and merge into it.
    """
    if threshold is None:
        threshold = hysteresis_band(trace.counts)
    if isinstance(threshold, tuple):
        leave, enter = threshold
        if leave > enter:
            raise ConfigError("hysteresis band needs leave <= enter")
        flags = _hysteresis_flags(trace.counts, leave, enter)
    else:
        flags = trace.counts >= threshold
    runs = _runs(flags)
    if len(runs) > 1:
        relabeled = []
        for i, (state, length) in enumerate(runs):
            if length < min_dwell:
                state = runs[i + 1][0] if i == 0 else relabeled[-1][0]
            relabeled.append((state, length))
        merged: List[List] = []
        for state, length in relabeled:
            if merged and merged[-1][0] == state:
                merged[-1][1] += length
            else:
                merged.append([state, length])
        runs = [(s, n) for s, n in merged]
    dwells = [("on" if state else "off", n * trace.bin_width) for state, n in runs]
    logger.debug("segmented %d bins into %d dwells (threshold %s)", trace.counts.size, len(dwells), threshold)
    return dwells


def dwell_histogram(dwells: Sequence[Dwell], state: str, n_bins: int = 25, max_dwell: float = None, drop_edges: bool = True) -> DwellHistogram:
    """Histogram of the dwell times in ``state``.

    The first and last dwells of a trace are cut by the record and are
    dropped unless ``drop_edges`` is False. ``max_dwell`` defaults to the
    99th percentile of the dwells.
    """
    if state not in STATES:
        raise ConfigError(f"state must be one of {STATES}")
    items = list(dwells)
    if drop_edges and len(items) > 2:
        items = items[1:-1]
    times = np.array([d for s, d in items if s == state])
    if times.size == 0:
        raise FitError(f"no '{state}' dwells to histogram")
    if max_dwell is None:
        max_dwell = float(np.quantile(times, 0.99))
    edges = np.linspace(0.0, max_dwell, n_bins + 1)
    freq, _ = np.histogram(times, bins=edges)
    return DwellHistogram(state, edges, freq)


def _r_squared(y: np.ndarray, fitted: np.ndarray, weights: np.ndarray = None) -> float:
    w = np.ones_like(y) if weights is None else weights
    mean = np.sum(w * y) / np.sum(w)
    ss_tot = float(np.sum(w * (y - mean) ** 2))
    if ss_tot == 0:
        return math.nan
    return float(min(1.0, max(0.0, 1.0 - np.sum(w * (y - fitted) ** 2) / ss_tot)))


def fit_exponential(hist: DwellHistogram, method: str = "log") -> RateFit:
    """Fit ``N(t) = N0 exp(-rate t)`` to a dwell histogram.

    Args:
        hist (DwellHistogram): Dwell histogram.
        method (str): "log" for weighted least squares on log-frequencies
            (empty bins excluded), "nonlinear" for a direct least-squares fit.

    Returns:
        RateFit: Rate in Hz, its standard error and R^2.

    Raises:
        FitError: With fewer than 3 nonempty bins or a non-positive rate.
    """
    centers = 0.5 * (hist.bin_edges[:-1] + hist.bin_edges[1:])
    freq = hist.frequencies.astype(float)
    keep = freq > 0
    if np.count_nonzero(keep) < 3:
        raise FitError("exponential fit needs at least 3 nonempty bins")
    x, y = centers[keep], freq[keep]

    if method == "log":
        log_y = np.log(y)
        coef, cov = np.polyfit(x, log_y, 1, w=np.sqrt(y), cov="unscaled")
        fitted = np.polyval(coef, x)
        dof = x.size - 2
        chi2 = float(np.sum(y * (log_y - fitted) ** 2))
        scale = chi2 / dof if dof > 0 else 1.0
        rate = -coef[0]
        stderr = math.sqrt(cov[0, 0] * scale)
        r2 = _r_squared(log_y, fitted, y)
    elif method == "nonlinear":
        p0 = [y[0], 1.0 / max(np.average(x, weights=y), 1e-300)]
        try:
            popt, pcov = optimize.curve_fit(lambda t, n0, r: n0 * np.exp(-r * t), x, y, p0=p0, sigma=np.sqrt(np.maximum(y, 1.0)))
        except RuntimeError as exc:
            raise FitError(f"nonlinear exponential fit failed: {exc}") from exc
        rate = popt[1]
        stderr = float(np.sqrt(pcov[1, 1]))
        r2 = _r_squared(y, popt[0] * np.exp(-rate * x))
    else:
        raise ConfigError(f"unknown fit method {method!r}")
    if not rate > 0:
        raise FitError(f"fitted rate {rate:.3g} Hz is not positive")
    return RateFit(float(rate), float(stderr), float(r2), method)


def fit_linear_rates(powers: Sequence[float], rates: Sequence[float]) -> LinearRateFit:
    """Least squares ``power = m * rate`` through the origin.

    Raises:
        FitError: With fewer than 3 points.
    """
    y = np.asarray(powers, dtype=float)
    x = np.asarray(rates, dtype=float)
    if x.size < 3 or x.size != y.size:
        raise FitError("linear rate fit needs at least 3 (power, rate) pairs")
    sxx = float(np.dot(x, x))
    if sxx == 0:
        raise FitError("all rates are zero")
    m = float(np.dot(x, y)) / sxx
    residuals = y - m * x
    stderr = math.sqrt(float(np.dot(residuals, residuals)) / (x.size - 1) / sxx)
    r2 = math.nan if np.ptp(x) == 0 else _r_squared(y, m * x)
    if math.isnan(r2):
        logger.warning("rates do not vary, R^2 is undefined")
    return LinearRateFit(m, stderr, r2)


def off_fraction(data: Union[CountTrace, Sequence[Dwell]], **segment_kwargs) -> float:
    """Fraction of the record spent 'off'."""
    dwells = segment_trace(data, **segment_kwargs) if isinstance(data, CountTrace) else list(data)
    if not dwells:
        raise ConfigError("no dwells given")
    total = sum(d for _, d in dwells)
    return sum(d for s, d in dwells if s == "off") / total


@dataclass
class PowerPoint:
    power: float
    rate_on_off: RateFit
    rate_off_on: RateFit
    observed_off_fraction: float

    @property
    def predicted_off_fraction(self) -> float:
        """Off fraction implied by this power's fitted rates."""
        k1, k2 = self.rate_on_off.rate, self.rate_off_on.rate
        return k1 / (k1 + k2)


@dataclass
class BlinkReport:
    points: List[PowerPoint]
    grad_on_off: Optional[LinearRateFit]
    grad_off_on: Optional[LinearRateFit]

    @property
    def stationary_off_fraction(self) -> float:
        """Power-independent off fraction from the gradients."""
        if self.grad_on_off is None or self.grad_off_on is None:
            return math.nan
        m1, m2 = self.grad_on_off.gradient, self.grad_off_on.gradient
        return m2 / (m1 + m2)

    def to_dict(self) -> Dict:
        def _fit(f):
            return None if f is None else {"gradient_nw_per_hz": f.gradient, "stderr_nw_per_hz": f.stderr, "r_squared": _nan_to_none(f.r_squared)}

        return {
            "points": [
                {
                    "power_nw": p.power,
                    "rate_on_off_hz": p.rate_on_off.rate,
                    "rate_on_off_stderr_hz": p.rate_on_off.rate_stderr,
                    "rate_off_on_hz": p.rate_off_on.rate,
                    "rate_off_on_stderr_hz": p.rate_off_on.rate_stderr,
                    "observed_off_fraction": p.observed_off_fraction,
                    "predicted_off_fraction": p.predicted_off_fraction,
                }
                for p in self.points
            ],
            "gradient_on_off": _fit(self.grad_on_off),
            "gradient_off_on": _fit(self.grad_off_on),
            "stationary_off_fraction": _nan_to_none(self.stationary_off_fraction),
        }


def _nan_to_none(value: float):
    return None if value is None or math.isnan(value) else value


def analyze_trace(trace: CountTrace, threshold: float = None, min_dwell: int = 2, n_bins: int = 25, method: str = "log") -> PowerPoint:
    """Rates and off fraction of a single trace; on dwells give on->off, off dwells off->on."""
    dwells = segment_trace(trace, threshold, min_dwell)
    on_fit = fit_exponential(dwell_histogram(dwells, "on", n_bins), method)
    off_fit = fit_exponential(dwell_histogram(dwells, "off", n_bins), method)
    power = math.nan if trace.power is None else trace.power
    return PowerPoint(power, on_fit, off_fit, off_fraction(dwells))


def analyze_power_series(traces: Sequence[CountTrace], **kwargs) -> BlinkReport:
    """Per-trace analysis and, with three or more powers, the rate-vs-power gradients."""
    points = [analyze_trace(t, **kwargs) for t in traces]
    for p in points:
        logger.info("power %.3g nW: on->off %.3g Hz, off->on %.3g Hz, off %.3f", p.power, p.rate_on_off.rate, p.rate_off_on.rate, p.observed_off_fraction)
    if len(points) < 3 or any(math.isnan(p.power) for p in points):
        return BlinkReport(points, None, None)
    powers = [p.power for p in points]
    g1 = fit_linear_rates(powers, [p.rate_on_off.rate for p in points])
    g2 = fit_linear_rates(powers, [p.rate_off_on.rate for p in points])
    return BlinkReport(points, g1, g2)


def load_trace(csv_path: Union[str, Path]) -> CountTrace:
    """Read a (time_bin, counts) CSV and its JSON sidecar (``bin_width``, ``power``).

    The sidecar is the CSV path with a ``.json`` suffix.

    Raises:
        ConfigError: If a file is unreadable or the sidecar misses a field.
    """
    csv_path = Path(csv_path)
    sidecar = csv_path.with_suffix(".json")
    try:
        table = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
        meta = json.loads(sidecar.read_text())
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read trace {csv_path}: {exc}") from exc
    for key in ("bin_width", "power"):
        if key not in meta:
            raise ConfigError(f"sidecar {sidecar.name} is missing '{key}'")
    return CountTrace(float(meta["bin_width"]), table[:, 1].astype(int), float(meta["power"]))


def save_trace(trace: CountTrace, csv_path: Union[str, Path]):
    """Write a trace in the format :func:`load_trace` reads."""
    csv_path = Path(csv_path)
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["time_bin", "counts"])
        writer.writerows((i, int(c)) for i, c in enumerate(trace.counts))
    csv_path.with_suffix(".json").write_text(json.dumps({"bin_width": trace.bin_width, "power": trace.power}, indent=2) + "\n")


def synthesize_trace(rates: BlinkRates, duration: float, bin_width: float, on_rate: float, off_rate: float = 0.0, seed: int = 0) -> CountTrace:
    """Poisson count trace of a simulated telegraph at ``rates.power``."""
    intervals = sample_telegraph(rates, duration, derive_rng(seed, 0))
    counts = telegraph_counts(intervals, bin_width, on_rate, off_rate, derive_rng(seed, 1))
    return CountTrace(bin_width, counts, rates.power)
