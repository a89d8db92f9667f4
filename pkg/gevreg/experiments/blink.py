"""Blinking analysis command: synthesize or ingest traces, then fit rates and gradients."""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

from gevreg.blink import analyze_power_series, load_trace, synthesize_trace
from gevreg.errors import ConfigError
from gevreg.experiments.base import Experiment
from gevreg.rng import derive_rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BlinkParams:
    """``experiment`` section of the blink command.

    Either ``trace_files`` (CSV with JSON sidecars) or ``powers`` (nW, traces
    synthesized from ``photon.blink``) must be given.
    """

    trace_files: Tuple[str, ...] = ()
    powers: Tuple[float, ...] = ()
    duration: float = 200.0
    bin_width: float = 1e-4
    on_rate: float = 2e4
    off_rate: float = 0.0
    threshold: Optional[float] = None
    min_dwell: int = 2
    n_bins: int = 25
    method: str = "log"
    write_traces: bool = False

    def __post_init__(self):
        if bool(self.trace_files) == bool(self.powers):
            raise ConfigError("give exactly one of trace_files or powers")
        if self.method not in ("log", "nonlinear"):
            raise ConfigError("method must be 'log' or 'nonlinear'")


class BlinkExperiment(Experiment):
    """Writes ``report.json`` with rates, gradients and off fractions per power."""

    name = "blink"
    Params = BlinkParams

    def _validate(self):
        if self.params.powers:
            if self.config.photon.blink is None:
                raise ConfigError("synthesized traces need a photon.blink section", self.config.line_of("photon"))
            if self.config.seed is None:
                raise ConfigError("synthesized traces need a seed")

    def _traces(self):
        p = self.params
        if p.trace_files:
            return [load_trace(self.resolve(f)) for f in p.trace_files]
        rates = self.config.photon.blink
        seeds = [int(derive_rng(self.seed, i).integers(2**63)) for i in range(len(p.powers))]
        return self.map_ordered(
            lambda item: synthesize_trace(rates.at_power(item[0]), p.duration, p.bin_width, p.on_rate, p.off_rate, item[1]),
            list(zip(p.powers, seeds)),
        )

    def _compute(self):
        p = self.params
        traces = self._traces()
        report = analyze_power_series(traces, threshold=p.threshold, min_dwell=p.min_dwell, n_bins=p.n_bins, method=p.method)
        self._add_json("report.json", report.to_dict(), primary=True)
        if p.write_traces and p.powers:
            for i, trace in enumerate(traces):
                self._add_csv(f"traces/trace_{i:02d}.csv", ["time_bin", "counts"], enumerate(trace.counts), primary=True)
                self._add_json(f"traces/trace_{i:02d}.json", {"bin_width": trace.bin_width, "power": trace.power}, primary=True)
