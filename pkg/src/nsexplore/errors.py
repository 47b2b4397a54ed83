"""Shared exception types."""


class ExplorationError(Exception):
    """Base class for package errors."""


class ConfigError(ExplorationError):
    """Invalid configuration or arguments."""


class ContractError(ExplorationError):
    """A caller violated the emit/observe protocol (harness bug)."""


class StepCeilingError(ExplorationError):
    """The global step ceiling was hit before the algorithm could make progress."""


class PerturbationError(ExplorationError):
    """A kernel perturbation failed to achieve its intended qualitative effect."""
