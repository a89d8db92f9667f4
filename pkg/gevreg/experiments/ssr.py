"""Electron and nuclear single-shot readout commands."""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from gevreg.errors import ConfigError
from gevreg.experiments.base import Experiment
from gevreg.readout.nuclear import NuclearSsrParams, best_cell, rabi_sweep, reads_threshold_grid, repetitions_curve, run_nuclear_ssr
from gevreg.readout.ssr import ConfusionMatrix, SsrOptions, run_ssr_experiment
from gevreg.sequences.pulses import optimal_2pi_rabi

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SsrParams:
    shots: int = 100000
    use_composite: bool = False
    anticorr: str = "off"
    threshold: int = 1
    pi_rabi: float = 7.65e6
    composite_rabi: float = 4.0e6
    qnd_readout: bool = True
    write_shots: bool = False

    def __post_init__(self):
        if self.shots < 1:
            raise ConfigError("shots must be at least 1")

    def options(self) -> SsrOptions:
        return SsrOptions(self.use_composite, self.anticorr, self.threshold, self.pi_rabi, self.composite_rabi, self.qnd_readout)


def _confusion_rows(cm: ConfusionMatrix):
    return [
        ("B", "B", cm.shots[0], cm.p_b_given_b),
        ("B", "D", cm.shots[1], cm.p_d_given_b),
        ("D", "B", cm.shots[2], cm.p_b_given_d),
        ("D", "D", cm.shots[3], cm.p_d_given_d),
    ]


CONFUSION_HEADER = ["prepared", "read", "shots", "probability"]


class SsrExperiment(Experiment):
    """Writes ``confusion.csv``, ``summary.json`` and, on request, ``shots.csv``."""

    name = "ssr"
    Params = SsrParams
    stochastic = True

    def _validate(self):
        try:
            self._options = self.params.options()
        except ValueError as exc:
            raise ConfigError(f"experiment: {exc}", self.config.line_of("experiment", "anticorr")) from None

    def _compute(self):
        result = run_ssr_experiment(self.config.register, self.config.photon, self.params.shots, self._options, self.seed)
        cm = result.confusion
        self._add_csv("confusion.csv", CONFUSION_HEADER, _confusion_rows(cm), primary=True)
        if self.params.write_shots:
            rows = ((r.prepared.value, " ".join(str(c) for c in r.counts_sequence), r.classified.value) for r in result.records())
            self._add_csv("shots.csv", ["prepared", "counts", "classification"], rows)
        b_rate, d_rate = result.rejection_rates
        self._add_json(
            "summary.json",
            {
                "shots_per_state": result.shots,
                "transfer_fidelity": result.transfer_fidelity,
                "f_ssr": result.fidelity,
                "f_ssr_stderr": result.fidelity_stderr,
                "f_qnd": result.qnd_fidelity,
                "p_b2_given_b1": result.qnd[0],
                "p_d2_given_d1": result.qnd[1],
                "rejected_b": result.rejected[0],
                "rejected_d": result.rejected[1],
                "rejection_rate_b": b_rate,
                "rejection_rate_d": d_rate,
                "anticorr": self._options.anticorr.value,
            },
            primary=True,
        )


@dataclass(frozen=True)
class NuclearParams:
    """``experiment`` section of the nuclear_ssr command; frequencies in Hz."""

    shots: int = 20000
    rabi: float = 765e3
    n_reads: int = 2
    threshold: int = 2
    init_fidelity_n: float = 0.95
    nucleus: int = 0
    gate_model: str = "selective"
    rabi_grid: Tuple[float, ...] = ()
    reads_grid: Tuple[int, ...] = (1, 2, 3, 4)
    threshold_grid: Tuple[int, ...] = (1, 2, 3, 4, 5)
    max_repetitions: int = 6

    def __post_init__(self):
        if self.shots < 1 or self.max_repetitions < 1:
            raise ConfigError("shots and max_repetitions must be at least 1")

    def protocol(self) -> NuclearSsrParams:
        return NuclearSsrParams(self.rabi, self.n_reads, self.threshold, self.init_fidelity_n, self.nucleus, self.gate_model)


class NuclearSsrExperiment(Experiment):
    """Nuclear readout at the configured point plus the Rabi, reads x threshold and repetitions sweeps."""

    name = "nuclear_ssr"
    Params = NuclearParams
    stochastic = True

    def _validate(self):
        self._protocol = self.params.protocol()
        if not 0 <= self.params.nucleus < self.config.register.n_nuclei:
            raise ConfigError("nucleus index out of range for the register", self.config.line_of("experiment", "nucleus"))

    def _compute(self):
        p = self.params
        cfg, model = self.config.register, self.config.photon
        result = run_nuclear_ssr(cfg, model, self._protocol, p.shots, self.seed)
        self._add_csv("confusion.csv", CONFUSION_HEADER, _confusion_rows(result.confusion), primary=True)
        a_zz = abs(cfg.nuclei[p.nucleus].A_zz)
        summary = {
            "f_ssr": result.fidelity,
            "f_qnd": result.qnd_fidelity,
            "rabi_hz": p.rabi,
            "optimal_2pi_rabi_m2_hz": optimal_2pi_rabi(a_zz, 2),
        }

        if p.rabi_grid:
            fidelities = rabi_sweep(cfg, model, p.rabi_grid, self._protocol, p.shots, self.seed)
            self._add_csv("rabi_sweep.csv", ["rabi_hz", "f_ssr"], zip(p.rabi_grid, fidelities))
            summary["best_rabi_hz"] = float(p.rabi_grid[int(np.argmax(fidelities))])

        grid = reads_threshold_grid(cfg, model, p.reads_grid, p.threshold_grid, self._protocol, p.shots, self.seed)
        rows = [(n, t, grid[i, j]) for i, n in enumerate(p.reads_grid) for j, t in enumerate(p.threshold_grid)]
        self._add_csv("reads_threshold.csv", ["n_reads", "threshold", "f_ssr"], rows)
        best_reads, best_threshold = best_cell(grid, p.reads_grid, p.threshold_grid)
        summary["best_n_reads"] = best_reads
        summary["best_threshold"] = best_threshold

        curve = repetitions_curve(cfg, model, p.max_repetitions, self._protocol, p.shots, self.seed)
        self._add_csv("repetitions.csv", ["n_reads", "best_f_ssr"], zip(range(1, p.max_repetitions + 1), curve))
        self._add_json("summary.json", summary, primary=True)
