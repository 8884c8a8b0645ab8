"""harvestplan: robust tactical forest harvest scheduling.

Builds multi-scenario multiobjective harvest scheduling models, generates
Pareto-optimal schedule archives with a bundled exact MILP solver, stress
tests them over sampled volume scenario cohorts, scores robustness against
planner thresholds, and drives the interactive decision loop through a
service API.
"""

from .model import (
    Assortment,
    DemandTable,
    DimensionMismatch,
    HarvestSchedule,
    InstanceValidationError,
    MetaObjectiveKey,
    ProblemInstance,
    StandRecord,
    UNHARVESTED,
    evaluate_schedule,
    stand_count_summary,
    validate_instance,
)
from .scenarios import (
    GENERATOR_VERSION,
    Scenario,
    ScenarioCohort,
    named_scenarios,
    sample_cohort,
    stress_cohort,
)
from .milp import (
    MilpModel,
    ReferenceConfig,
    SolveOptions,
    SolveOutcome,
    brute_force_solve,
    build_scalarized_milp,
    build_single_objective_milp,
    export_lp_file,
    solve_lp_relaxation,
    solve_milp,
)
from .pareto import (
    IdealResult,
    NadirEstimate,
    SolutionArchive,
    WeightSchedule,
    audit_pareto,
    compute_ideals,
    estimate_nadir,
    generate_archive,
    generate_weight_schedule,
    summarize_ideals,
)
from .robustness import (
    DomainCriteria,
    EvaluationMatrix,
    RobustnessScore,
    domain_criterion,
    filter_solutions,
    objective_ranges,
    objectives_for_periods,
    rank_solutions,
    stress_test,
)
from .synth import synthesize_instance

__version__ = "0.1.0"
