"""Fit command: hyperfine couplings from an XY8 spectrum or T2* from a Ramsey signal."""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from gevreg.errors import ConfigError, FitError
from gevreg.experiments.base import Experiment
from gevreg.spectra.fitting import fit_hyperfine, fit_t2star

logger = logging.getLogger(__name__)

FIT_KINDS = ("hyperfine", "t2star")


@dataclass(frozen=True)
class FitParams:
    """``experiment`` section of the fit command.

    ``data_file`` is a CSV with a header whose first two columns are
    (tau_dd_s, survival) for hyperfine fits or (time_s, signal) for T2* fits.
    """

    kind: str
    data_file: str
    a_zx_bounds: Tuple[float, float] = (10e3, 3e6)
    a_zz_bounds: Tuple[float, float] = (-3.5e6, 3.5e6)
    start: Optional[Tuple[float, float]] = None
    order_n: int = 1
    rabi: float = 7.65e6
    ideal_pulses: bool = False
    grid_points: int = 7
    noise_floor: float = 1e-3
    exponent: float = 2.0
    frequency_guess: Optional[float] = None

    def __post_init__(self):
        if self.kind not in FIT_KINDS:
            raise ConfigError(f"kind must be one of {FIT_KINDS}")
        for name in ("a_zx_bounds", "a_zz_bounds"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ConfigError(f"{name} must be (low, high) with low < high")
        if self.start is not None and len(self.start) != 2:
            raise ConfigError("start must be (A_zx, A_zz)")


class FitExperiment(Experiment):
    """Writes ``fit.json``; the nuclei already in the register stay fixed during a hyperfine fit."""

    name = "fit"
    Params = FitParams

    def _validate(self):
        path = self.resolve(self.params.data_file)
        try:
            table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read data file {path}: {exc}", self.config.line_of("experiment", "data_file")) from None
        if table.shape[1] < 2 or table.shape[0] < 6:
            raise ConfigError("data file needs two columns and at least 6 rows", self.config.line_of("experiment", "data_file"))
        self._x, self._y = table[:, 0], table[:, 1]

    def _compute(self):
        p = self.params
        try:
            if p.kind == "hyperfine":
                fit = fit_hyperfine(
                    self._x,
                    self._y,
                    self.config.register,
                    (p.a_zx_bounds, p.a_zz_bounds),
                    p.order_n,
                    p.start,
                    p.grid_points,
                    p.noise_floor,
                    p.rabi,
                    p.ideal_pulses,
                )
                data = {
                    "kind": p.kind,
                    "a_zx_hz": fit.A_zx,
                    "a_zz_hz": fit.A_zz,
                    "residual": fit.residual,
                    "detected": fit.detected,
                    "evaluations": len(fit.residual_trace),
                }
            else:
                fit = fit_t2star(self._y, self._x, p.exponent, p.frequency_guess)
                data = {
                    "kind": p.kind,
                    "t2star_s": fit.t2star,
                    "t2star_stderr_s": fit.t2star_stderr,
                    "frequency_hz": fit.frequency,
                    "amplitude": fit.amplitude,
                    "offset": fit.offset,
                    "phase_rad": fit.phase,
                    "unbounded": fit.unbounded,
                }
        except FitError as exc:
            logger.error("fit failed: %s; last residuals %s", exc, exc.residuals[-5:])
            raise
        self._add_json("fit.json", data, primary=True)
