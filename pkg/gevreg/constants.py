"""Numerical tolerances and reference values of the register."""

import numpy as np

# tolerances
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-10
UNITARY_TOL = 1e-10
ROW_SUM_TOL = 1e-9

TWO_PI = 2.0 * np.pi

# gyromagnetic ratios in Hz/T, entered as magnitudes
GAMMA_C13 = 10.7084e6
GAMMA_GEV = 28.0e9

# register studied in the source measurements
SAMPLE_FIELD_T = 96.837e-3
# (A_zx, A_zz) in Hz
C13_A_COUPLING = (598e3, -2963e3)
C13_B_COUPLING = (128e3, 39e3)
# measured peak pairs (lower, upper) in Hz, 13C_C has no fitted coupling
SAMPLE_PEAKS = {
    "C13_A": (499.13e3, 2479.38e3),
    "C13_B": (1001.65e3, 1058.62e3),
    "C13_C": (1025.39e3, 1032.17e3),
}

T2_E = 3.52e-3
T1_E = 20.7

# blinking gradients in nW/Hz: (on->off, off->on), quoted and per-power fitted values
BLINK_GRADIENTS = (0.690, 0.2966)
BLINK_GRADIENTS_FITTED = (0.701, 0.297)

# U5b composite inversion phases (0, 11, 2, 11, 0) * pi/6
U5B_PHASES = tuple(k * np.pi / 6.0 for k in (0, 11, 2, 11, 0))
