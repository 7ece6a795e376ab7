"""Experiment harness: named experiments, seeded runs and the command-line driver."""
from .experiments import EXPERIMENTS, Experiment
from .runner import RunConfig, run
from .thresholds import DEFAULT_THRESHOLDS, merge_thresholds

__all__ = ["EXPERIMENTS", "Experiment", "RunConfig", "run", "DEFAULT_THRESHOLDS", "merge_thresholds"]
