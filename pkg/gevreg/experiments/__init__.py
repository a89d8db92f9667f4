"""Command-line experiments: one class per command, created through the factory."""

from gevreg.experiments.base import Experiment
from gevreg.experiments.factory import ExperimentFactory, ExperimentType

__all__ = ["Experiment", "ExperimentFactory", "ExperimentType"]
