"""Factory of the command-line experiments.

Usage: maps a command name from the config onto its experiment class.
"""

import logging
from enum import Enum

from gevreg.config import ExperimentConfig
from gevreg.errors import ConfigError
from gevreg.experiments.base import Experiment
from gevreg.experiments.blink import BlinkExperiment
from gevreg.experiments.cs import CsExperiment
from gevreg.experiments.fit import FitExperiment
from gevreg.experiments.ssr import NuclearSsrExperiment, SsrExperiment
from gevreg.experiments.xy8 import Xy8Experiment

logger = logging.getLogger(__name__)


class ExperimentType(Enum):
    XY8 = "xy8"
    CS = "cs"
    SSR = "ssr"
    NUCLEAR_SSR = "nuclear_ssr"
    BLINK = "blink"
    FIT = "fit"


class ExperimentFactory:
    @staticmethod
    def get_experiment(experiment_type: ExperimentType, config: ExperimentConfig, **kwargs: object) -> Experiment:
        experiments = {
            ExperimentType.XY8: (Xy8Experiment, {"tau_dd_start": "first XY8 spacing in s", "tau_dd_stop": "last XY8 spacing in s"}),
            ExperimentType.CS: (
                CsExperiment,
                {
                    "tau_dd": "XY8 spacing of the conditional blocks in s",
                    "order_n": "XY8 order of each block",
                    "tau_start": "first correlation time in s",
                    "tau_step": "correlation time step in s",
                    "tau_count": "number of correlation times",
                },
            ),
            ExperimentType.SSR: (SsrExperiment, {}),
            ExperimentType.NUCLEAR_SSR: (NuclearSsrExperiment, {}),
            ExperimentType.BLINK: (BlinkExperiment, {}),
            ExperimentType.FIT: (FitExperiment, {"kind": "'hyperfine' or 't2star'", "data_file": "CSV with the measured data"}),
        }

        experiment_class, required_params = experiments[experiment_type]

        missing_params = [param for param in required_params if param not in config.experiment]
        if missing_params:
            details = "; ".join(f"{p} ({required_params[p]})" for p in missing_params)
            raise ConfigError(f"missing experiment parameters for {experiment_type.value}: {details}", config.line_of("experiment"))

        return experiment_class(config, **kwargs)

    @staticmethod
    def from_config(config: ExperimentConfig, **kwargs: object) -> Experiment:
        try:
            experiment_type = ExperimentType(config.command)
        except ValueError:
            names = ", ".join(t.value for t in ExperimentType)
            raise ConfigError(f"unknown command '{config.command}', expected one of: {names}", config.line_of("command")) from None
        logger.debug("experiment %s selected", experiment_type.value)
        return ExperimentFactory.get_experiment(experiment_type, config, **kwargs)
