"""Autonomous exploration in piecewise-stationary controlled Markov processes."""

from .cmp import (ChangeSchedule, Kernel, Simulator, build_schedule,
                  kernel_from_partial, load_kernel, load_schedule,
                  save_schedule, stationary_schedule)
from .errors import (ConfigError, ContractError, ExplorationError,
                     PerturbationError, StepCeilingError)
from .explorer import ExplorerConfig, ExplorerRun
from .meta import MetaConfig, MetaRun, RunResult, run_meta
from .policies import Hypothesis, Policy
from .scheduler import StreamScheduler

__version__ = "0.1.0"

__all__ = [
    "ChangeSchedule", "Kernel", "Simulator", "build_schedule",
    "kernel_from_partial", "load_kernel", "load_schedule", "save_schedule",
    "stationary_schedule",
    "ConfigError", "ContractError", "ExplorationError", "PerturbationError",
    "StepCeilingError",
    "ExplorerConfig", "ExplorerRun",
    "MetaConfig", "MetaRun", "RunResult", "run_meta",
    "Hypothesis", "Policy",
    "StreamScheduler",
]
