"""Spectroscopy simulations, spectral estimation and fits."""

from gevreg.spectra.cs import CsPlan, CsResult, cs_spectrum, persistent_peaks, simulate_cs, simulate_cs_2d
from gevreg.spectra.fitting import HyperfineFit, T2StarFit, fit_hyperfine, fit_t2star
from gevreg.spectra.psd import Peak, PeakSet, PsdParams, PsdResult, extract_peaks, welch_psd
from gevreg.spectra.ramsey import RamseySignal, simulate_nuclear_ramsey
from gevreg.spectra.xy8 import OrderSweep, Xy8Spectrum, entangling_order, simulate_order_sweep, simulate_xy8_spectrum

__all__ = [
    "CsPlan",
    "CsResult",
    "HyperfineFit",
    "OrderSweep",
    "Peak",
    "PeakSet",
    "PsdParams",
    "PsdResult",
    "RamseySignal",
    "T2StarFit",
    "Xy8Spectrum",
    "cs_spectrum",
    "entangling_order",
    "extract_peaks",
    "fit_hyperfine",
    "fit_t2star",
    "persistent_peaks",
    "simulate_cs",
    "simulate_cs_2d",
    "simulate_nuclear_ramsey",
    "simulate_order_sweep",
    "simulate_xy8_spectrum",
    "welch_psd",
]
