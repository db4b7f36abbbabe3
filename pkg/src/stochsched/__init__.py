"""Two-stage stochastic scheduling: form bags before the machine count is known.

The three objectives (expected makespan, expected Santa Claus value and
expected l_p norm) share one pipeline of guessing, rounding, scenario
grouping and a configuration integer program; :func:`solve` runs it and
returns the best solution found together with diagnostics.
"""

from .baselines import identical_machines_best, list_schedule, lpt_bags
from .estimators import TwoStageScheduler
from .generate import generate_instance
from .model import (
    BagAssignment,
    DomainError,
    Instance,
    Objective,
    ScenarioAssignment,
    TwoStageSolution,
    ValidationError,
    expected_cost,
)
from .oracle import BudgetExceeded, OracleBudget, exact_solve
from .schemes import Budgets, RunReport, eptas_lp, eptas_makespan, eptas_santa, solve

__all__ = [
    "BagAssignment",
    "BudgetExceeded",
    "Budgets",
    "DomainError",
    "Instance",
    "Objective",
    "OracleBudget",
    "RunReport",
    "ScenarioAssignment",
    "TwoStageScheduler",
    "TwoStageSolution",
    "ValidationError",
    "eptas_lp",
    "eptas_makespan",
    "eptas_santa",
    "exact_solve",
    "expected_cost",
    "generate_instance",
    "identical_machines_best",
    "list_schedule",
    "lpt_bags",
    "solve",
]

__version__ = "0.1.0"
