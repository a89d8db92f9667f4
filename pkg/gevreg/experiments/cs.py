"""Correlation spectroscopy command, 1D and 2D."""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

from gevreg.errors import ConfigError, SequenceError
from gevreg.experiments.base import Experiment
from gevreg.sequences import serialization
from gevreg.spectra.cs import CsPlan, block_sequence, cs_spectrum, persistent_peaks, simulate_cs, simulate_cs_2d
from gevreg.spectra.psd import PeakSet, PsdParams, PsdResult

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CsParams:
    """``experiment`` section of the cs command.

    A non-empty ``tau_dd_grid`` switches to the 2D scan, one PSD per tau_dd.
    """

    tau_dd: float
    order_n: int
    tau_start: float
    tau_step: float
    tau_count: int
    randomize_tau: bool = False
    memory_mode: str = "memoryless"
    shots_per_point: int = 1
    rabi: float = 7.65e6
    ideal_pulses: bool = True
    tau_dd_grid: Tuple[float, ...] = ()
    segment_length: Optional[int] = None
    overlap_fraction: float = 0.5
    window: str = "hann"
    detrend: str = "mean"
    max_peaks: int = 10
    floor_factor: float = 10.0

    def __post_init__(self):
        if not (self.tau_start > 0 and self.tau_step > 0):
            raise ConfigError("tau_start and tau_step must be positive")

    def plan(self) -> CsPlan:
        return CsPlan.from_range(
            self.tau_dd,
            self.order_n,
            self.tau_start,
            self.tau_step,
            self.tau_count,
            randomize_tau=self.randomize_tau,
            memory_mode=self.memory_mode,
            shots_per_point=self.shots_per_point,
            rabi=self.rabi,
            ideal_pulses=self.ideal_pulses,
        )

    def psd_params(self) -> PsdParams:
        return PsdParams(self.segment_length, self.overlap_fraction, self.window, self.detrend)


def _peaks_json(peaks: PeakSet):
    return [{"frequency_hz": p.frequency, "power_per_hz": p.power} for p in peaks]


class CsExperiment(Experiment):
    """Writes ``signal.csv``, ``psd.csv`` and ``peaks.json``; the 2D scan writes one row directory per tau_dd plus ``index.csv``."""

    name = "cs"
    Params = CsParams
    stochastic = True

    def _validate(self):
        try:
            self._plan = self.params.plan()
            self._psd = self.params.psd_params()
            self._plan.check_against(self.config.register)
        except (ConfigError, SequenceError) as exc:
            raise ConfigError(f"experiment: {exc}", self.config.line_of("experiment")) from None

    def _add_psd(self, prefix: str, psd: PsdResult):
        self._add_csv(f"{prefix}psd.csv", ["frequency_hz", "power_per_hz"], zip(psd.frequencies, psd.power))

    def _compute(self):
        p = self.params
        cfg = self.config.register
        self._add_text("sequence.yaml", serialization.dumps(block_sequence(self._plan)))
        if not p.tau_dd_grid:
            result = simulate_cs(cfg, self._plan, self.seed)
            psd, peaks = cs_spectrum(result, self._psd, p.max_peaks, p.floor_factor)
            self._add_csv("signal.csv", ["tau_s", "p_up"], zip(result.tau, result.signal), primary=True)
            self._add_psd("", psd)
            self._add_json("peaks.json", {"resolution_hz": psd.resolution, "peaks": _peaks_json(peaks)}, primary=True)
            return

        rows = simulate_cs_2d(cfg, p.tau_dd_grid, self._plan, self.seed, self._psd, self.threads, p.max_peaks, p.floor_factor)
        index = []
        for i, row in enumerate(rows):
            prefix = f"row_{i:03d}/"
            self._add_csv(f"{prefix}signal.csv", ["tau_s", "p_up"], zip(row.result.tau, row.result.signal))
            self._add_psd(prefix, row.psd)
            self._add_json(f"{prefix}peaks.json", {"tau_dd_s": row.tau_dd, "peaks": _peaks_json(row.peaks)})
            index.append((i, row.tau_dd, len(row.peaks), f"row_{i:03d}"))
        self._add_csv("index.csv", ["row", "tau_dd_s", "n_peaks", "directory"], index, primary=True)
        self._add_json("peaks.json", {"persistent_peaks_hz": persistent_peaks(rows)}, primary=True)
