"""Experiment drivers: configs, runners, artifacts, and the CLI."""

from .config import EXPERIMENTS, ExperimentConfig, reference_config
from .hartmann import hartmann3, hartmann_split
from .io import RunRecord, write_csv, write_json
from .runs import (HARTMANN_KERNELS, QUARTET_TARGETS, RUNNERS, STEP_VARIANTS,
                   run_approx_hartmann, run_approx_step, run_burgers,
                   run_poisson, run_validate_kernels, step_dataset)

__all__ = [
    "EXPERIMENTS", "ExperimentConfig", "reference_config",
    "hartmann3", "hartmann_split",
    "RunRecord", "write_csv", "write_json",
    "HARTMANN_KERNELS", "QUARTET_TARGETS", "RUNNERS", "STEP_VARIANTS",
    "run_approx_hartmann", "run_approx_step", "run_burgers", "run_poisson",
    "run_validate_kernels", "step_dataset",
]
