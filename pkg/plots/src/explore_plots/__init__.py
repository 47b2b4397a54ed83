"""Figure generation for exploration experiment run logs."""

from .figures import bound_gap, explore_curve
from .io import SchemaError, load_steps_csv, load_summary

__version__ = "0.1.0"

__all__ = ["bound_gap", "explore_curve", "SchemaError", "load_steps_csv",
           "load_summary"]
