"""The full analysis loop in miniature: archive, stress test, robust choice.

Generates the Pareto archive with the emphasis weight schedule, stress-tests
it over a sampled cohort, scores robustness against planner thresholds, and
narrows the candidates the way a planner would.
"""

import numpy as np

from harvestplan import (
    DomainCriteria,
    ReferenceConfig,
    SolveOptions,
    compute_ideals,
    domain_criterion,
    filter_solutions,
    generate_archive,
    generate_weight_schedule,
    named_scenarios,
    objectives_for_periods,
    rank_solutions,
    stand_count_summary,
    stress_cohort,
    stress_test,
    summarize_ideals,
)
from harvestplan.pareto import audit_pareto
from harvestplan.synth import synthesize_instance

instance = synthesize_instance(seed=5, n_stands=16, n_periods=3)
scenarios = list(named_scenarios(instance))
k = instance.n_assortments * instance.n_periods * len(scenarios)

# Ideal values per objective: the best any schedule can do, one objective at
# a time.  Demand is period-uniform, so the period shortcut kicks in.
ideals = compute_ideals(instance, scenarios, options=SolveOptions(rel_gap_tol=0.0))
for a, (lo, hi) in summarize_ideals(ideals).items():
    print(f"ideal range {instance.assortments[a - 1].name:9s}: [{lo:.4g}, {hi:.4g}] m3")

# One solve per emphasis vector plus the neutral one: k + 1 solutions.
archive = generate_archive(
    instance,
    scenarios,
    generate_weight_schedule(k),
    ReferenceConfig.neutral(instance, len(scenarios)),
    options=SolveOptions(rel_gap_tol=0.0),
)
dupes = sum(1 for e in archive.entries if e.duplicate_of is not None)
print(f"\narchive: {len(archive)} solutions ({dupes} duplicates flagged)")
print(f"dominance audit findings: {len(audit_pareto(archive))}")

# Stress test across 300 sampled scenarios.
cohort = stress_cohort(instance, total=300, seed=9)
matrix = stress_test(archive, cohort, instance)
print(f"evaluation matrix: {matrix.values.shape}")

# Planner thresholds: maximum acceptable deviation as a share of demand.
criteria = DomainCriteria.per_assortment([0.35, 0.25, 0.35], instance.n_periods)
scores = domain_criterion(matrix, criteria, instance.demand)

early = objectives_for_periods(instance, [1, 2])
for floor in (0.95, 0.90, 0.80):
    kept = filter_solutions(scores, floor, early)
    print(f"robustness >= {floor:.0%} in periods 1-2: {len(kept)} solutions")
    if kept:
        break

ranked = rank_solutions(scores, early, "min")
best_id, best_score = ranked[0]
print(f"\nmost robust on the early periods: solution {best_id} ({best_score:.1%})")
entry = archive.entry(best_id)
print(f"generated by weights '{entry.label}', status {entry.status}")
print(f"stand counts per period: {stand_count_summary(entry.schedule, instance)}")
print(f"full robustness profile:\n{np.round(scores.for_solution(best_id), 3)}")
