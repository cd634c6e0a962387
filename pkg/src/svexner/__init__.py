"""One-dimensional Saint-Venant-Exner solver built on flux vector splitting.

First-order path-conservative splitting and a second-order ADER extension
with AENO reconstruction, plus reference oracles and a small CLI.
"""

from .ader2 import AenoParams, run_second_order, step_second_order
from .model import (
    G,
    CellState,
    CounterFlux,
    FieldState,
    Frozen,
    Grass,
    PositivityFailure,
    SolverError,
    StarFailure,
    ThresholdGrass,
)
from .pressure_riemann import StarState, star_state
from .splitting import BoundarySpec, run_first_order, step_first_order

__all__ = [
    "G", "CellState", "FieldState", "Grass", "ThresholdGrass", "CounterFlux", "Frozen",
    "SolverError", "PositivityFailure", "StarFailure", "StarState", "star_state",
    "BoundarySpec", "step_first_order", "run_first_order", "AenoParams",
    "step_second_order", "run_second_order",
]
