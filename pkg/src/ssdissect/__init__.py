"""Exact Subset Sum by recursive dissection, with a tunable space-time tradeoff."""

from .dissect import BailoutPolicy, RunStats, generate_solutions
from .instance import Instance, ModularInstance, SolutionStream, SolutionVector
from .modulus import assign_moduli
from .preprocess import preprocess
from .solver import SolveReport, SolverConfig, solve, solve_baseline, verify
from .tradeoff import F, plan_tree, tau

__all__ = [
    "BailoutPolicy", "F", "Instance", "ModularInstance", "RunStats", "SolutionStream",
    "SolutionVector", "SolveReport", "SolverConfig", "assign_moduli", "generate_solutions",
    "plan_tree", "preprocess", "solve", "solve_baseline", "tau", "verify",
]
