"""Mixed-integer core: model construction, the bundled simplex/branch-and-bound
solver, the enumeration oracle, and LP-format export.

The solver seam is the pair (:class:`MilpModel`, :class:`SolveOutcome`): an
external MILP engine can replace :func:`solve_milp` behind the same contract
(consume the dense model description, return a schedule plus objective,
bound and status).
"""

from .build import (
    DEFAULT_EPSILON,
    MilpModel,
    ReferenceConfig,
    build_scalarized_milp,
    build_single_objective_milp,
    scalarized_objective,
)
from .bnb import ScheduleEvaluator, SolveOptions, SolveOutcome, solve_milp
from .brute import InstanceTooLarge, brute_force_solve, enumerate_meta_values
from .lp_format import export_lp_file
from .simplex import (
    Infeasible,
    IterationLimit,
    LpSolution,
    Unbounded,
    solve_lp_relaxation,
)

__all__ = [
    "DEFAULT_EPSILON",
    "MilpModel",
    "ReferenceConfig",
    "build_scalarized_milp",
    "build_single_objective_milp",
    "scalarized_objective",
    "ScheduleEvaluator",
    "SolveOptions",
    "SolveOutcome",
    "solve_milp",
    "InstanceTooLarge",
    "brute_force_solve",
    "enumerate_meta_values",
    "export_lp_file",
    "Infeasible",
    "IterationLimit",
    "LpSolution",
    "Unbounded",
    "solve_lp_relaxation",
]
