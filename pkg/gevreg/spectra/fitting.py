"""Hyperfine fits of XY8 spectra and T2* fits of (undersampled) Ramsey signals."""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from gevreg.dynamics import HyperfineVector, RegisterConfig
from gevreg.errors import FitError
from gevreg.spectra.xy8 import DEFAULT_RABI, simulate_xy8_spectrum

logger = logging.getLogger(__name__)


@dataclass
class HyperfineFit:
    """Result of :func:`fit_hyperfine`.

    Attributes:
        A_zx (float): Fitted perpendicular coupling in Hz.
        A_zz (float): Fitted parallel coupling in Hz.
        residual (float): Sum of squared residuals at the optimum.
        detected (bool): False when the data show no resonance above ``noise_floor``.
        residual_trace (list): Objective values visited by the simplex.
    """

    A_zx: float
    A_zz: float
    residual: float
    detected: bool = True
    residual_trace: List[float] = field(default_factory=list, repr=False)


def fit_hyperfine(
    tau_dd: Sequence[float],
    survival: Sequence[float],
    cfg_template: RegisterConfig,
    bounds: Tuple[Tuple[float, float], Tuple[float, float]],
    order_n: int = 1,
    start: Optional[Tuple[float, float]] = None,
    grid_points: int = 7,
    noise_floor: float = 1e-3,
    rabi: float = DEFAULT_RABI,
    ideal_pulses: bool = False,
) -> HyperfineFit:
    """Fit one nucleus' (A_zx, A_zz) to a measured XY8 spectrum.

    The fitted nucleus is appended to the nuclei already in ``cfg_template``,
    which stay fixed; fitting several nuclei is done one after the other.
    A coarse grid over ``bounds`` seeds a Nelder-Mead refinement.

    Args:
        tau_dd (Sequence[float]): Spacings of the measured points in seconds.
        survival (Sequence[float]): Measured survival per spacing.
        cfg_template (RegisterConfig): Register with the already known nuclei.
        bounds (tuple): ((A_zx_min, A_zx_max), (A_zz_min, A_zz_max)) in Hz.
        order_n (int): XY8 order of the measurement.
        start (tuple, optional): Initial guess, competes with the grid optimum.
        grid_points (int): Grid points per parameter.
        noise_floor (float): Dip depth below which no coupling is reported.
        rabi (float): Rabi frequency of the pulses in Hz.
        ideal_pulses (bool): Simulate instantaneous pulses.

    Returns:
        HyperfineFit: Fitted couplings and residual.

    Raises:
        FitError: If the optimum lies on the boundary of ``bounds``.
    """
    tau = np.asarray(tau_dd, dtype=float)
    data = np.asarray(survival, dtype=float)
    known = tuple(cfg_template.nuclei)
    (x_lo, x_hi), (z_lo, z_hi) = bounds
    scale = np.array([max(abs(x_lo), abs(x_hi)), max(abs(z_lo), abs(z_hi))])

    baseline = simulate_xy8_spectrum(cfg_template, tau, order_n, rabi, ideal_pulses).survival
    if np.max(np.abs(data - baseline)) < noise_floor:
        logger.warning("no resonance above the noise floor %.3g, coupling not detected", noise_floor)
        return HyperfineFit(0.0, 0.0, float(np.sum((data - baseline) ** 2)), detected=False)

    trace: List[float] = []

    def _residual(params) -> float:
        a_zx, a_zz = params
        cfg = cfg_template.with_nuclei(known + (HyperfineVector(A_zx=a_zx, A_zz=a_zz),))
        model = simulate_xy8_spectrum(cfg, tau, order_n, rabi, ideal_pulses).survival
        return float(np.sum((model - data) ** 2))

    def _scaled(u) -> float:
        p = u * scale
        if not (x_lo <= p[0] <= x_hi and z_lo <= p[1] <= z_hi):
            return math.inf
        value = _residual(p)
        trace.append(value)
        return value

    candidates = [
        (x, z) for x, z in itertools.product(np.linspace(x_lo, x_hi, grid_points), np.linspace(z_lo, z_hi, grid_points))
    ]
    if start is not None:
        candidates.append(tuple(start))
    scores = [_residual(c) for c in candidates]
    best = np.array(candidates[int(np.argmin(scores))]) / scale
    logger.debug("grid search best %s, residual %.3g", best * scale, min(scores))

    step = 0.05 * np.maximum(np.abs(best), 0.05)
    simplex = np.array([best, best + [step[0], 0.0], best + [0.0, step[1]]])
    res = optimize.minimize(
        _scaled, best, method="Nelder-Mead", options={"initial_simplex": simplex, "xatol": 1e-7, "fatol": 1e-16, "maxiter": 4000}
    )
    a_zx, a_zz = res.x * scale
    span = np.array([x_hi - x_lo, z_hi - z_lo])
    edge = np.minimum(np.abs([a_zx - x_lo, a_zz - z_lo]), np.abs([x_hi - a_zx, z_hi - a_zz]))
    if np.any(edge < 1e-6 * span):
        raise FitError(f"optimum ({a_zx:.6g}, {a_zz:.6g}) Hz lies on the bounds", trace)
    if not res.success:
        logger.warning("simplex stopped without convergence: %s", res.message)
    return HyperfineFit(float(a_zx), float(a_zz), float(res.fun), True, trace)


@dataclass
class T2StarFit:
    """Decaying-cosine fit ``A exp(-(t/T2*)^p) cos(2 pi f t + phi) + c``.

    ``unbounded`` is set when the fitted T2* exceeds ten times the time window.
    """

    t2star: float
    frequency: float
    amplitude: float
    offset: float
    phase: float
    t2star_stderr: float
    unbounded: bool = False


def _decaying_cosine(p: float):
    def model(t, amplitude, rate, frequency, phase, offset):
        return amplitude * np.exp(-((rate * t) ** p)) * np.cos(2 * np.pi * frequency * t + phase) + offset

    return model


def fit_t2star(signal: Sequence[float], time_grid: Sequence[float], exponent: float = 2.0, frequency_guess: float = None) -> T2StarFit:
    """Least-squares T2* fit; undersampled data yield the aliased frequency.

    Starting frequencies come from the strongest periodogram bins (DC
    included for purely decaying signals) and the best fit is kept.

    Raises:
        FitError: If no start converges.
    """
    y = np.asarray(signal, dtype=float)
    t = np.asarray(time_grid, dtype=float)
    if y.size != t.size or y.size < 6:
        raise FitError("need matching signal and time grids with at least 6 points")
    window = t[-1] - t[0]
    dt = float(np.median(np.diff(t)))
    spectrum = np.abs(np.fft.rfft(y - y.mean()))
    freqs = np.fft.rfftfreq(y.size, dt)
    guesses = [float(f) for f in freqs[np.argsort(spectrum)[::-1][:3]]]
    guesses.append(0.0)
    if frequency_guess is not None:
        guesses.insert(0, float(frequency_guess))

    model = _decaying_cosine(exponent)
    offset0 = float(y[-max(3, y.size // 10) :].mean())
    amp0 = float(np.max(np.abs(y - offset0)))
    lower = [-np.inf, 0.0, 0.0, -np.inf, -np.inf]
    upper = [np.inf, np.inf, 0.5 / dt, np.inf, np.inf]
    best = None
    for f0 in guesses:
        for phase0 in (0.0, np.pi / 2):
            p0 = [amp0, 1.0 / (0.5 * window), min(f0, 0.5 / dt * 0.999), phase0, offset0]
            try:
                popt, pcov = optimize.curve_fit(model, t - t[0], y, p0=p0, bounds=(lower, upper), maxfev=20000)
            except (RuntimeError, ValueError):
                continue
            cost = float(np.sum((model(t - t[0], *popt) - y) ** 2))
            if best is None or cost < best[0]:
                best = (cost, popt, pcov)
    if best is None:
        raise FitError("T2* fit did not converge from any start")

    _, popt, pcov = best
    amplitude, rate, frequency, phase, offset = popt
    rate_err = float(np.sqrt(pcov[1, 1])) if np.all(np.isfinite(pcov)) else math.nan
    t2star = math.inf if rate == 0 else 1.0 / rate
    unbounded = t2star > 10.0 * window
    t2_err = rate_err / rate**2 if rate > 0 else math.inf
    if unbounded:
        logger.warning("fitted T2* exceeds ten times the time window")
    # the phase is referenced to the first sample
    return T2StarFit(t2star, float(frequency), float(amplitude), float(offset), float(phase), t2_err, unbounded)
