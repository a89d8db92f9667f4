"""XY8 spectra and order sweeps of the electron coupled to its nuclei."""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from gevreg.dynamics import RegisterConfig, apply_dephasing
from gevreg.errors import ConfigError
from gevreg.sequences.compiler import compile_sequence
from gevreg.sequences.pulses import PulseSequence, xy8_echo
from gevreg.spin_core import ComplexMatrix, electron_down_thermal

logger = logging.getLogger(__name__)

DEFAULT_RABI = 7.65e6


@dataclass(frozen=True)
class Xy8Spectrum:
    tau_dd: np.ndarray
    survival: np.ndarray
    order_n: int


@dataclass(frozen=True)
class OrderSweep:
    order_n: np.ndarray
    n_pulses: np.ndarray
    sigma_z: np.ndarray
    tau_dd: float


def survival_from_propagator(u: ComplexMatrix, n_nuclei: int) -> float:
    """P(|down>) after ``u`` acting on |down> (x) thermal nuclei."""
    half = u.shape[0] // 2
    return float(np.sum(np.abs(u[half:, half:]) ** 2) / 2**n_nuclei)


def simulate_xy8_spectrum(
    cfg: RegisterConfig, tau_dd_grid: Sequence[float], order_n: int, rabi: float = DEFAULT_RABI, ideal_pulses: bool = False, center_to_center: bool = False
) -> Xy8Spectrum:
    """Electron survival in |down> after pi/2 (x), XY8-N, pi/2 (-x) for every tau_dd.

    Without nuclei (or off resonance) the echo returns the electron to |down>;
    resonant nuclei entangle with it and pull the survival below one.

    Args:
        cfg (RegisterConfig): Register; all configured nuclei are simulated exactly.
        tau_dd_grid (Sequence[float]): Inter-pulse spacings in seconds.
        order_n (int): XY8 order N.
        rabi (float): Rabi frequency of the pulses in Hz.
        ideal_pulses (bool): Use instantaneous rotations.
        center_to_center (bool): Interpret tau_dd between pulse centers.

    Returns:
        Xy8Spectrum: Survival per tau_dd.
    """
    grid = np.asarray(tau_dd_grid, dtype=float)
    if grid.size == 0:
        raise ConfigError("tau_dd grid must not be empty")
    survival = np.empty(grid.size)
    for i, tau in enumerate(grid):
        u = compile_sequence(xy8_echo(float(tau), order_n, rabi, center_to_center), cfg, ideal_pulses)
        survival[i] = survival_from_propagator(u, cfg.n_nuclei)
    logger.debug("XY8-%d spectrum over %d points, min survival %.4f", order_n, grid.size, survival.min())
    return Xy8Spectrum(grid, survival, order_n)


def simulate_order_sweep(
    cfg: RegisterConfig, tau_dd: float, n_grid: Sequence[int], rabi: float = DEFAULT_RABI, ideal_pulses: bool = False, center_to_center: bool = False
) -> OrderSweep:
    """Electron <sigma_z> = P(up) - P(down) after the XY8-N echo for each order N.

    Uncoupled, every point is -1. With ``T2_e`` configured the electron
    coherence is damped by ``exp(-(t/T2_e)^p)`` over the free evolution time
    of the block, just before the closing pi/2.
    """
    orders = np.asarray(list(n_grid), dtype=int)
    rho0 = electron_down_thermal(cfg.n_nuclei)
    values = np.empty(orders.size)
    for i, n in enumerate(orders):
        seq = xy8_echo(tau_dd, int(n), rabi, center_to_center)
        body = PulseSequence(seq.elements[:-1])
        closing = PulseSequence(seq.elements[-1:])
        rho = rho0.evolve(compile_sequence(body, cfg, ideal_pulses))
        if cfg.T2_e is not None:
            rho = apply_dephasing(rho, body.free_evolution_time, cfg)
        rho = rho.evolve(compile_sequence(closing, cfg, ideal_pulses))
        values[i] = 2.0 * rho.electron_population_up() - 1.0
    return OrderSweep(orders, 8 * orders, values, tau_dd)


def entangling_order(sweep: OrderSweep) -> int:
    """Smallest order whose <sigma_z> is closest to zero before the first sign change."""
    z = sweep.sigma_z
    crossings = np.nonzero(np.sign(z[1:]) != np.sign(z[:-1]))[0]
    stop = crossings[0] + 2 if crossings.size else z.size
    return int(sweep.order_n[int(np.argmin(np.abs(z[:stop])))])
