"""Interleaving oracle: exhaustive concrete exploration with a permission ledger."""

from .explore import (
    DEFAULT_LOOP_CAP, DEFAULT_MAX_STATES, DEFAULT_MAX_STEPS, BoundExceeded,
    ExplorationResult, ScheduleInfeasible, Trace, Violation, explore, replay,
)
from .machine import Machine, OracleError

__all__ = ["DEFAULT_LOOP_CAP", "DEFAULT_MAX_STATES", "DEFAULT_MAX_STEPS", "BoundExceeded",
           "ExplorationResult", "Machine", "OracleError", "ScheduleInfeasible", "Trace",
           "Violation", "explore", "replay"]
