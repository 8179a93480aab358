from .feasibility import FeasibilityViolation, check_feasibility, link_loads
from .model import MilpModel, export_lp, formulate
from .solver import SolverInvariantError, solve

__all__ = [
    "FeasibilityViolation",
    "MilpModel",
    "SolverInvariantError",
    "check_feasibility",
    "export_lp",
    "formulate",
    "link_loads",
    "solve",
]
