"""Stress testing and domain-criterion robustness scoring.

A candidate schedule is re-evaluated across the whole scenario cohort; its
robustness for one (assortment, period) objective is the fraction of
scenarios in which the deviation stays below the planner's acceptable
threshold.  Scoring, filtering and ranking are pure functions over the
finished evaluation matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .fingerprints import fingerprint_cohort, fingerprint_instance
from .model import DemandTable, DimensionMismatch, ProblemInstance
from .pareto import SolutionArchive
from .scenarios import ScenarioCohort


class FingerprintMismatch(ValueError):
    """Artifacts built from different inputs were combined."""


class EmptyCohort(ValueError):
    """Robustness scores need at least one scenario."""


ThresholdMode = Literal["fraction", "absolute"]


@dataclass(frozen=True)
class DomainCriteria:
    """Acceptable-deviation thresholds per (assortment, period).

    In ``fraction`` mode a threshold of 0.3 accepts deviations below 30% of
    that objective's demand; ``absolute`` mode compares against plain m3
    values.  ``strict`` keeps the comparison at "deviation < threshold";
    setting it False uses <= instead (ties at exact multiples of demand can
    occur with synthetic data).
    """

    thresholds: np.ndarray  # (n_A, n_T) >= 0
    mode: ThresholdMode = "fraction"
    strict: bool = True

    def __post_init__(self):
        arr = np.array(self.thresholds, dtype=float, copy=True)
        if (arr < 0).any() or not np.isfinite(arr).all():
            raise ValueError("thresholds must be finite and >= 0")
        arr.setflags(write=False)
        object.__setattr__(self, "thresholds", arr)

    @classmethod
    def per_assortment(
        cls,
        fractions: Sequence[float],
        n_periods: int,
        mode: ThresholdMode = "fraction",
        strict: bool = True,
    ) -> "DomainCriteria":
        """Same threshold in all periods, one value per assortment."""
        col = np.asarray(fractions, dtype=float)[:, None]
        return cls(np.tile(col, (1, n_periods)), mode=mode, strict=strict)

    def limits(self, demand: DemandTable) -> np.ndarray:
        """Absolute m3 limits per (assortment, period)."""
        if self.thresholds.shape != demand.values.shape:
            raise DimensionMismatch(
                f"thresholds {self.thresholds.shape} vs demand {demand.values.shape}"
            )
        if self.mode == "fraction":
            return self.thresholds * demand.values
        return np.array(self.thresholds, copy=True)


@dataclass(frozen=True)
class EvaluationMatrix:
    """Deviations of every archive solution in every cohort scenario.

    ``values`` has shape (n_solutions, n_scenarios, n_A, n_T).
    """

    values: np.ndarray
    solution_ids: tuple[int, ...]
    scenario_ids: tuple[str, ...]
    archive_fingerprint: str
    cohort_fingerprint: str

    @property
    def n_solutions(self) -> int:
        return self.values.shape[0]

    @property
    def n_scenarios(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class RobustnessScore:
    """Fraction of scenarios meeting the criteria, per solution and objective.

    ``values`` has shape (n_solutions, n_A, n_T); every entry is a multiple
    of 1/n_scenarios.
    """

    values: np.ndarray
    solution_ids: tuple[int, ...]
    n_scenarios: int

    def for_solution(self, solution_id: int) -> np.ndarray:
        return self.values[self.solution_ids.index(solution_id)]


def stress_test(
    archive: SolutionArchive, cohort: ScenarioCohort, instance: ProblemInstance
) -> EvaluationMatrix:
    """Evaluate every archive schedule in every cohort scenario.

    Vectorized over (solutions x scenarios); identical inputs produce
    bit-identical matrices.
    """
    inst_fp = fingerprint_instance(instance)
    if archive.instance_fingerprint != inst_fp:
        raise FingerprintMismatch(
            "archive was generated from a different instance "
            f"({archive.instance_fingerprint[:12]} != {inst_fp[:12]})"
        )
    n_a, n_t, n_s = instance.n_assortments, instance.n_periods, instance.n_stands
    n_sol = len(archive.entries)
    n_scen = len(cohort)
    if n_scen == 0 or n_sol == 0:
        values = np.zeros((n_sol, n_scen, n_a, n_t))
        return EvaluationMatrix(
            values,
            tuple(archive.ids()),
            tuple(cohort.ids),
            archive.fingerprint,
            fingerprint_cohort(cohort),
        )
    vols = cohort.volume_tensor()  # (n_scen, n_A, n_S)
    if vols.shape[1:] != (n_a, n_s):
        raise DimensionMismatch(
            f"cohort volumes {vols.shape} do not match instance ({n_a}, {n_s})"
        )
    indicators = np.stack(
        [e.schedule.indicator(n_t) for e in archive.entries]
    )  # (n_sol, n_S, n_T)
    produced = np.einsum("qaj,sjt->sqat", vols, indicators, optimize=True)
    deviations = np.abs(produced - instance.demand.values[None, None, :, :])
    return EvaluationMatrix(
        values=deviations,
        solution_ids=tuple(archive.ids()),
        scenario_ids=tuple(cohort.ids),
        archive_fingerprint=archive.fingerprint,
        cohort_fingerprint=fingerprint_cohort(cohort),
    )


def domain_criterion(
    evaluations: EvaluationMatrix,
    criteria: DomainCriteria,
    demand: DemandTable,
) -> RobustnessScore:
    """Share of cohort scenarios in which each deviation meets its threshold."""
    if evaluations.n_scenarios == 0:
        raise EmptyCohort("cannot score robustness over an empty cohort")
    limits = criteria.limits(demand)[None, None, :, :]
    if criteria.strict:
        met = evaluations.values < limits
    else:
        met = evaluations.values <= limits
    scores = met.mean(axis=1)
    return RobustnessScore(
        values=scores,
        solution_ids=evaluations.solution_ids,
        n_scenarios=evaluations.n_scenarios,
    )


def _subset_mask(
    objectives: Sequence[tuple[int, int]], n_a: int, n_t: int
) -> np.ndarray:
    if not objectives:
        raise ValueError("objective subset must not be empty")
    mask = np.zeros((n_a, n_t), dtype=bool)
    for a, t in objectives:
        if not (1 <= a <= n_a and 1 <= t <= n_t):
            raise DimensionMismatch(f"objective (a={a}, t={t}) outside shape")
        mask[a - 1, t - 1] = True
    return mask


def objectives_for_periods(
    instance: ProblemInstance, periods: Sequence[int], assortments: Sequence[int] | None = None
) -> list[tuple[int, int]]:
    """All (assortment, period) pairs for the given periods."""
    assortments = assortments or range(1, instance.n_assortments + 1)
    return [(a, t) for a in assortments for t in periods]


def filter_solutions(
    scores: RobustnessScore,
    floor: float,
    objectives: Sequence[tuple[int, int]],
) -> list[int]:
    """Ids whose score is >= floor on every selected objective, archive order."""
    n_a, n_t = scores.values.shape[1:]
    mask = _subset_mask(objectives, n_a, n_t)
    keep = (scores.values[:, mask] >= floor).all(axis=1)
    return [sid for sid, ok in zip(scores.solution_ids, keep) if ok]


def rank_solutions(
    scores: RobustnessScore,
    objectives: Sequence[tuple[int, int]],
    aggregation: Literal["min", "mean"] = "min",
) -> list[tuple[int, float]]:
    """Solutions ordered by aggregate robustness over the subset, best first.

    Ties are broken by ascending solution id.
    """
    n_a, n_t = scores.values.shape[1:]
    mask = _subset_mask(objectives, n_a, n_t)
    sub = scores.values[:, mask]
    agg = sub.min(axis=1) if aggregation == "min" else sub.mean(axis=1)
    order = sorted(
        zip(scores.solution_ids, agg), key=lambda pair: (-pair[1], pair[0])
    )
    return [(sid, float(v)) for sid, v in order]


def objective_ranges(
    evaluations: EvaluationMatrix,
    objectives: Sequence[tuple[int, int]] | None = None,
    percentiles: Sequence[float] = (5.0, 25.0, 50.0, 75.0, 95.0),
) -> dict[tuple[int, int], dict[str, float | dict[str, float]]]:
    """Per-objective spread of deviations across solutions x scenarios."""
    if evaluations.values.size == 0:
        raise ValueError("empty evaluation matrix")
    n_a, n_t = evaluations.values.shape[2:]
    if objectives is None:
        objectives = [(a, t) for a in range(1, n_a + 1) for t in range(1, n_t + 1)]
    out = {}
    for a, t in objectives:
        if not (1 <= a <= n_a and 1 <= t <= n_t):
            raise DimensionMismatch(f"objective (a={a}, t={t}) outside shape")
        flat = evaluations.values[:, :, a - 1, t - 1].reshape(-1)
        out[(a, t)] = {
            "min": float(flat.min()),
            "max": float(flat.max()),
            "mean": float(flat.mean()),
            "percentiles": {
                f"p{int(p) if float(p).is_integer() else p}": float(np.percentile(flat, p))
                for p in percentiles
            },
        }
    return out
