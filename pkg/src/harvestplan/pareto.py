"""Ideal/nadir computation, the emphasis weight schedule, and archive generation.

The archive generation scheme solves the scalarized model once per weight
vector: one vector per meta objective with a large emphasis weight on it
(everything else at the base weight), plus a neutral all-base vector, giving
k + 1 solutions for k meta objectives.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .fingerprints import fingerprint_config, fingerprint_instance
from .model import (
    EQUALITY_TOL_M3,
    HarvestSchedule,
    MetaObjectiveKey,
    ProblemInstance,
    evaluate_schedule,
)
from .milp import (
    ReferenceConfig,
    SolveOptions,
    SolveOutcome,
    build_scalarized_milp,
    build_single_objective_milp,
    solve_milp,
)
from .scenarios import Scenario

DEFAULT_EMPHASIS = 100.0
DEFAULT_BASE = 1.0


@dataclass(frozen=True)
class IdealResult:
    """Best achievable deviation per (assortment, period, scenario).

    ``values[a-1, t-1, p-1]`` is the single-objective optimum; with resource
    limits in play it is the best incumbent found instead, flagged through
    ``exact``.
    """

    values: np.ndarray  # (n_A, n_T, P)
    scenario_ids: tuple[str, ...]
    shortcut_used: bool
    exact: bool
    schedules: dict[tuple[int, int, int], HarvestSchedule] | None = None


@dataclass(frozen=True)
class NadirEstimate:
    """Payoff-table nadir approximation (upper envelope over the single-
    objective optimizers' schedules).  Always flagged approximate: the payoff
    table may both under- and overestimate the true nadir."""

    values: np.ndarray  # (n_A, n_T, P)
    method: str = "payoff-table"
    approximate: bool = True


@dataclass(frozen=True)
class WeightVector:
    label: str
    values: np.ndarray  # flat (k,), canonical meta order

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if not np.all(arr > 0):
            raise ValueError("weights must be > 0")
        object.__setattr__(self, "values", arr)


@dataclass(frozen=True)
class WeightSchedule:
    vectors: tuple[WeightVector, ...]

    def __len__(self) -> int:
        return len(self.vectors)


@dataclass
class ArchiveEntry:
    id: int  # 1-based, stable
    label: str
    weights: np.ndarray  # flat (k,)
    schedule: HarvestSchedule
    objective_values: np.ndarray  # (n_A, n_T, s) deviations per scenario
    status: str
    objective: float
    bound: float
    nodes: int
    wall_time_s: float
    duplicate_of: int | None = None

    @property
    def meta_vector(self) -> np.ndarray:
        return self.objective_values.reshape(-1)


@dataclass
class SolutionArchive:
    entries: list[ArchiveEntry]
    instance_fingerprint: str
    config_fingerprint: str
    scenario_ids: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def ids(self) -> list[int]:
        return [e.id for e in self.entries]

    def entry(self, entry_id: int) -> ArchiveEntry:
        for e in self.entries:
            if e.id == entry_id:
                return e
        raise KeyError(f"no archive entry with id {entry_id}")

    def meta_matrix(self) -> np.ndarray:
        """(n_entries, k) matrix of meta-objective deviations."""
        return np.stack([e.meta_vector for e in self.entries])

    @property
    def fingerprint(self) -> str:
        """Content fingerprint covering provenance and every schedule."""
        return fingerprint_config(
            {
                "kind": "archive",
                "instance": self.instance_fingerprint,
                "config": self.config_fingerprint,
                "assignments": [e.schedule.assignment for e in self.entries],
            }
        )


# ---------------------------------------------------------------------------
# Ideal points


def _solve_single(args) -> tuple[int, float, np.ndarray, bool]:
    instance, scenario, a, t, options = args
    model = build_single_objective_milp(instance, scenario, a, t)
    out = solve_milp(model, options)
    return (
        0,
        float(out.objective),
        out.schedule.assignment,
        out.status == "optimal",
    )


def compute_ideals(
    instance: ProblemInstance,
    scenarios: Sequence[Scenario],
    use_period_shortcut: bool = True,
    options: SolveOptions | None = None,
    keep_schedules: bool = False,
    workers: int = 1,
) -> IdealResult:
    """Solve one single-objective problem per (assortment, period, scenario).

    When demand is period-uniform the subproblems for different periods are
    identical, so with the shortcut enabled only period 1 is solved per
    (assortment, scenario) and the result is replicated; otherwise the flag
    is ignored with a warning.
    """
    options = options or SolveOptions(rel_gap_tol=0.0)
    n_a, n_t = instance.n_assortments, instance.n_periods
    uniform = instance.demand.is_period_uniform(EQUALITY_TOL_M3)
    if use_period_shortcut and not uniform:
        warnings.warn(
            "period shortcut requested but demand varies across periods; "
            "falling back to the full computation",
            stacklevel=2,
        )
    shortcut = use_period_shortcut and uniform

    periods = [1] if shortcut else list(range(1, n_t + 1))
    jobs = [
        (instance, scenarios[p], a, t, options)
        for a in range(1, n_a + 1)
        for t in periods
        for p in range(len(scenarios))
    ]

    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_solve_single, jobs, chunksize=8))
    else:
        results = [_solve_single(job) for job in jobs]

    values = np.zeros((n_a, n_t, len(scenarios)))
    exact = True
    schedules: dict[tuple[int, int, int], HarvestSchedule] = {}
    idx = 0
    for a in range(1, n_a + 1):
        for t in periods:
            for p in range(1, len(scenarios) + 1):
                _, value, assignment, was_exact = results[idx]
                idx += 1
                exact &= was_exact
                targets = range(1, n_t + 1) if shortcut else [t]
                for t_out in targets:
                    values[a - 1, t_out - 1, p - 1] = value
                    if keep_schedules:
                        remapped = np.where(assignment > 0, t_out, 0)
                        schedules[(a, t_out, p)] = HarvestSchedule(remapped)

    return IdealResult(
        values=values,
        scenario_ids=tuple(sc.id for sc in scenarios),
        shortcut_used=shortcut,
        exact=exact,
        schedules=schedules if keep_schedules else None,
    )


def summarize_ideals(ideals: IdealResult | np.ndarray) -> dict[int, tuple[float, float]]:
    """Per-assortment (min, max) of the ideal values across periods/scenarios."""
    values = ideals.values if isinstance(ideals, IdealResult) else np.asarray(ideals)
    if values.size == 0:
        raise ValueError("empty ideal tensor")
    return {
        a + 1: (float(values[a].min()), float(values[a].max()))
        for a in range(values.shape[0])
    }


def estimate_nadir(
    instance: ProblemInstance,
    scenarios: Sequence[Scenario],
    ideals: IdealResult,
) -> NadirEstimate:
    """Payoff-table nadir: evaluate every single-objective optimizer's schedule
    on all meta objectives and take the columnwise worst."""
    if ideals.schedules is None:
        raise ValueError("compute_ideals(..., keep_schedules=True) is required")
    n_a, n_t = instance.n_assortments, instance.n_periods
    vols = [np.asarray(sc.volumes) for sc in scenarios]
    nadir = np.array(ideals.values, copy=True)
    for schedule in ideals.schedules.values():
        f = np.stack(
            [evaluate_schedule(schedule, v, instance) for v in vols], axis=2
        )  # (n_A, n_T, P)
        nadir = np.maximum(nadir, f)
    return NadirEstimate(values=nadir)


# ---------------------------------------------------------------------------
# Weight schedule and archive


def generate_weight_schedule(
    k: int, emphasis: float = DEFAULT_EMPHASIS, base: float = DEFAULT_BASE
) -> WeightSchedule:
    """k one-objective-emphasis vectors plus the neutral all-base vector."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if emphasis == base:
        warnings.warn(
            "emphasis equals base: all weight vectors are identical", stacklevel=2
        )
    vectors = []
    for i in range(k):
        w = np.full(k, float(base))
        w[i] = float(emphasis)
        vectors.append(WeightVector(f"emphasis:{i + 1}", w))
    vectors.append(WeightVector("neutral", np.full(k, float(base))))
    return WeightSchedule(tuple(vectors))


def describe_weight_label(
    label: str, instance: ProblemInstance, n_scenarios: int
) -> str:
    """Human-readable form of a weight label, e.g. 'emphasis:5' ->
    'spruce, period 2, scenario 1'."""
    if not label.startswith("emphasis:"):
        return label
    index = int(label.split(":", 1)[1]) - 1
    key = MetaObjectiveKey.from_index(index, instance.n_periods, n_scenarios)
    name = instance.assortments[key.assortment - 1].name
    return f"{name}, period {key.period}, scenario {key.scenario}"


def _solve_scalarized(args) -> dict:
    instance, scenarios, ref, options = args
    model = build_scalarized_milp(instance, scenarios, ref)
    out = solve_milp(model, options)
    return {
        "assignment": out.schedule.assignment,
        "status": out.status,
        "objective": out.objective,
        "bound": out.bound,
        "nodes": out.nodes,
        "wall_time_s": out.wall_time_s,
    }


def generate_archive(
    instance: ProblemInstance,
    scenarios: Sequence[Scenario],
    schedule: WeightSchedule,
    base_config: ReferenceConfig,
    options: SolveOptions | None = None,
    workers: int = 1,
) -> SolutionArchive:
    """One scalarized solve per weight vector; entries keep full provenance.

    Duplicate schedules are retained and flagged with a duplicate-of link so
    the weight-to-solution map stays complete.  Solver resource limits are
    recorded per entry without aborting the batch.
    """
    options = options or SolveOptions()
    s = len(scenarios)
    shape = (instance.n_assortments, instance.n_periods, s)
    jobs = [
        (instance, list(scenarios), base_config.with_weights(v.values.reshape(shape)), options)
        for v in schedule.vectors
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_solve_scalarized, jobs))
    else:
        results = [_solve_scalarized(job) for job in jobs]

    vols = [np.asarray(sc.volumes) for sc in scenarios]
    entries: list[ArchiveEntry] = []
    seen: dict[bytes, int] = {}
    for i, (vector, result) in enumerate(zip(schedule.vectors, results)):
        sched = HarvestSchedule(result["assignment"])
        values = np.stack(
            [evaluate_schedule(sched, v, instance) for v in vols], axis=2
        )
        key = sched.assignment.tobytes()
        duplicate_of = seen.get(key)
        if duplicate_of is None:
            seen[key] = i + 1
        entries.append(
            ArchiveEntry(
                id=i + 1,
                label=vector.label,
                weights=vector.values,
                schedule=sched,
                objective_values=values,
                status=result["status"],
                objective=result["objective"],
                bound=result["bound"],
                nodes=result["nodes"],
                wall_time_s=result["wall_time_s"],
                duplicate_of=duplicate_of,
            )
        )

    config_fp = fingerprint_config(
        {
            "aspirations": base_config.aspirations,
            "epsilon": base_config.epsilon,
            "weights": [v.values for v in schedule.vectors],
            "labels": [v.label for v in schedule.vectors],
            "scenario_ids": [sc.id for sc in scenarios],
            "rel_gap_tol": options.rel_gap_tol,
            "node_limit": options.node_limit,
        }
    )
    return SolutionArchive(
        entries=entries,
        instance_fingerprint=fingerprint_instance(instance),
        config_fingerprint=config_fp,
        scenario_ids=tuple(sc.id for sc in scenarios),
    )


# ---------------------------------------------------------------------------
# Dominance audit


@dataclass(frozen=True)
class DominanceFinding:
    dominated_id: int
    dominated_by: int


def audit_pareto(archive: SolutionArchive) -> list[DominanceFinding]:
    """Pairwise dominance check over the stored meta-objective vectors.

    A dominated entry can only arise through numerical tolerance effects; it
    is reported, never deleted.  Duplicate (equal-vector) entries do not
    dominate each other.
    """
    findings: list[DominanceFinding] = []
    values = archive.meta_matrix()
    ids = archive.ids()
    n = len(ids)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if (values[j] <= values[i]).all() and (values[j] < values[i]).any():
                findings.append(DominanceFinding(ids[i], ids[j]))
                break
    return findings
