"""Example to run every shipped config through the command-line front end."""

import logging
from pathlib import Path

import numpy as np

from gevreg.cli import run
from gevreg.experiments.writers import csv_text
from gevreg.rng import derive_rng

# Configure logging to aid in debugging
logging.basicConfig(level=logging.INFO)

here = Path(__file__).parent

# Undersampled Ramsey data for the T2* fit: 1.98 ms decay, sampled every 20 us
# while the nucleus precesses at about 1.03 MHz.
t = np.arange(400) * 20e-6
signal = 0.5 + 0.4 * np.exp(-((t / 1.98e-3) ** 2)) * np.cos(2 * np.pi * 1.0301e6 * t)
signal += 0.02 * derive_rng(1).standard_normal(t.size)
(here / "out").mkdir(exist_ok=True)
(here / "out" / "ramsey_t2star.csv").write_text(csv_text(["time_s", "signal"], zip(t, signal)))

for name in ("xy8_c13a", "cs_memoryless", "cs_2d", "ssr_calibrated", "nuclear_ssr", "blink_synthetic", "fit_t2star"):
    config = here / f"{name}.yaml"
    command = config.read_text().split("command:")[1].split()[0]
    code = run([command, "--config", str(config), "--out", str(here / "out" / name), "--threads", "0"])
    logging.info("%s finished with exit code %d", name, code)
