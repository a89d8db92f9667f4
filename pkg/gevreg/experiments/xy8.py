"""XY8 spectrum and order sweep command."""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from gevreg.dynamics import conditional_frequencies, resonant_tau_dd
from gevreg.errors import ConfigError
from gevreg.experiments.base import Experiment
from gevreg.sequences import serialization
from gevreg.sequences.pulses import PulseSequence, readout_marker, xy8_echo
from gevreg.spectra.xy8 import entangling_order, simulate_order_sweep, simulate_xy8_spectrum

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Xy8Params:
    """``experiment`` section of the xy8 command; times in seconds, frequencies in Hz."""

    tau_dd_start: float
    tau_dd_stop: float
    points: int = 200
    order_n: int = 1
    rabi: float = 7.65e6
    ideal_pulses: bool = False
    center_to_center: bool = False
    order_grid: Tuple[int, ...] = ()
    order_tau_dd: Optional[float] = None

    def __post_init__(self):
        if self.points < 1:
            raise ConfigError("points must be at least 1")
        if not 0 < self.tau_dd_start <= self.tau_dd_stop:
            raise ConfigError("need 0 < tau_dd_start <= tau_dd_stop")
        if self.order_n < 1:
            raise ConfigError("order_n must be at least 1")
        if self.order_grid and self.order_tau_dd is None:
            raise ConfigError("order_grid needs order_tau_dd")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.tau_dd_start, self.tau_dd_stop, self.points)


class Xy8Experiment(Experiment):
    """Writes ``spectrum.csv`` (tau_dd_s, survival), ``summary.json`` and the block as ``sequence.yaml``."""

    name = "xy8"
    Params = Xy8Params

    def _shot(self, tau_dd: float) -> PulseSequence:
        p = self.params
        return xy8_echo(tau_dd, p.order_n, p.rabi, p.center_to_center) + PulseSequence((readout_marker(),))

    def _validate(self):
        t_pi = 1.0 / (2.0 * self.params.rabi)
        if self.params.tau_dd_start <= t_pi:
            raise ConfigError(f"tau_dd_start must exceed the pi pulse length {t_pi:g} s", self.config.line_of("experiment", "tau_dd_start"))

    def _compute(self):
        p = self.params
        cfg = self.config.register
        grid = p.grid

        def _point(tau):
            return simulate_xy8_spectrum(cfg, [tau], p.order_n, p.rabi, p.ideal_pulses, p.center_to_center).survival[0]

        survival = np.array(self.map_ordered(_point, list(grid)))
        self._add_csv("spectrum.csv", ["tau_dd_s", "survival"], zip(grid, survival), primary=True)
        self._add_text("sequence.yaml", serialization.dumps(self._shot(float(grid[0]))))

        nuclei = []
        for j in range(cfg.n_nuclei):
            f_up, f_dn = conditional_frequencies(cfg, j)
            nuclei.append({"f_up_hz": f_up, "f_dn_hz": f_dn, "resonant_tau_dd_s": resonant_tau_dd(cfg, j)})
        summary = {
            "order_n": p.order_n,
            "min_survival": float(survival.min()),
            "tau_dd_at_min_s": float(grid[int(np.argmin(survival))]),
            "nuclei": nuclei,
        }
        if p.order_grid:
            sweep = simulate_order_sweep(cfg, p.order_tau_dd, p.order_grid, p.rabi, p.ideal_pulses, p.center_to_center)
            self._add_csv("order_sweep.csv", ["order_n", "n_pulses", "sigma_z"], zip(sweep.order_n, sweep.n_pulses, sweep.sigma_z))
            summary["entangling_order_n"] = entangling_order(sweep)
        self._add_json("summary.json", summary, primary=True)
