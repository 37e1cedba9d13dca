"""Immune-response sepsis simulator, treatment learner, and evaluation harness."""

from .constants import CellKind, RuleConstants, load_constants
from .intervention import intervene, update_cytokine
from .params import SimulationParams, hours_to_frames
from .simulation import (
    Outcome,
    SimState,
    SimulationDiverged,
    SystemTotals,
    check_outcome,
    init_simulation,
    step_frame,
    system_totals,
)

__version__ = "0.1.0"

__all__ = [
    "CellKind",
    "RuleConstants",
    "load_constants",
    "intervene",
    "update_cytokine",
    "SimulationParams",
    "hours_to_frames",
    "Outcome",
    "SimState",
    "SimulationDiverged",
    "SystemTotals",
    "check_outcome",
    "init_simulation",
    "step_frame",
    "system_totals",
    "__version__",
]
