"""Event-by-event quantum experiment laboratory.

Each simulated particle takes exactly one branch per event while unit
amplitude waves co-propagate along all of them; ensemble frequencies
reproduce the squared-amplitude statistics. Analytic oracles for every
experiment live next to the samplers so simulations are always checked
against closed forms.
"""

__version__ = "0.1.0"

from .core import ActionWave, PhysConstants, RngStream
from .event_engine import (
    BranchSet,
    EnsembleStats,
    HistoryRecord,
    NonUnitaryError,
    Pipeline,
    run_ensemble,
)

__all__ = [
    "ActionWave",
    "PhysConstants",
    "RngStream",
    "BranchSet",
    "EnsembleStats",
    "HistoryRecord",
    "NonUnitaryError",
    "Pipeline",
    "run_ensemble",
    "__version__",
]
