"""Exhaustive-enumeration reference solver (test oracle, micro instances only).

Walks every possible assignment of stands to periods (including leaving a
stand unharvested), evaluates the scalarized objective directly from the
deviations, and keeps the best.  Enumeration is lexicographic over the
assignment vector, so the first minimum found is also the lexicographically
smallest optimal schedule.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..model import HarvestSchedule, ProblemInstance
from ..scenarios import Scenario
from .bnb import SolveOutcome
from .build import ReferenceConfig

_CHUNK = 1 << 14


class InstanceTooLarge(ValueError):
    """Enumeration would exceed the schedule-count guard."""


def enumerate_assignments(n_stands: int, n_periods: int, guard: int = 10_000_000):
    """Yield (chunk_start, assignments) blocks covering all schedules.

    Assignments are produced in lexicographic order of the per-stand vector
    (first stand most significant).
    """
    total = (n_periods + 1) ** n_stands
    if total > guard:
        raise InstanceTooLarge(
            f"{total} schedules exceed the enumeration guard of {guard}"
        )
    base = n_periods + 1
    weights = base ** np.arange(n_stands - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        digits = (idx[:, None] // weights[None, :]) % base
        yield start, digits.astype(np.int64)


def enumerate_meta_values(
    instance: ProblemInstance,
    scenarios: Sequence[Scenario],
    guard: int = 10_000_000,
) -> tuple[np.ndarray, np.ndarray]:
    """All schedules' meta-objective vectors.

    Returns (assignments, values) with values of shape
    (n_schedules, n_A * n_T * s) in canonical meta order.
    """
    n_s, n_t, n_a = instance.n_stands, instance.n_periods, instance.n_assortments
    s = len(scenarios)
    vols = np.stack([sc.volumes for sc in scenarios], axis=0)  # (s, n_A, n_S)
    demand = instance.demand.values
    all_assignments = []
    all_values = []
    for _, assignments in enumerate_assignments(n_s, n_t, guard):
        chunk = assignments.shape[0]
        prod = np.zeros((chunk, n_a, n_t, s))
        for t in range(n_t):
            ind = (assignments == t + 1).astype(float)  # (chunk, n_S)
            prod[:, :, t, :] = np.einsum("cj,paj->cap", ind, vols)
        dev = np.abs(prod - demand[None, :, :, None])
        all_assignments.append(assignments)
        all_values.append(dev.reshape(chunk, n_a * n_t * s))
    return np.concatenate(all_assignments), np.concatenate(all_values)


def brute_force_solve(
    instance: ProblemInstance,
    scenarios: Sequence[Scenario],
    reference: ReferenceConfig,
    guard: int = 10_000_000,
) -> SolveOutcome:
    """Global optimum of the scalarized problem by full enumeration."""
    import time

    start = time.monotonic()
    w = reference.weights.reshape(-1)
    asp = reference.aspirations.reshape(-1)
    eps = reference.epsilon

    best_obj = np.inf
    best_assignment = None
    count = 0
    n_s, n_t = instance.n_stands, instance.n_periods
    vols = np.stack([sc.volumes for sc in scenarios], axis=0)
    demand = instance.demand.values
    n_a, s = instance.n_assortments, len(scenarios)

    for _, assignments in enumerate_assignments(n_s, n_t, guard):
        chunk = assignments.shape[0]
        count += chunk
        prod = np.zeros((chunk, n_a, n_t, s))
        for t in range(n_t):
            ind = (assignments == t + 1).astype(float)
            prod[:, :, t, :] = np.einsum("cj,paj->cap", ind, vols)
        dev = np.abs(prod - demand[None, :, :, None]).reshape(chunk, -1)
        gaps = w[None, :] * (dev - asp[None, :])
        objs = np.maximum(gaps.max(axis=1), 0.0) + eps * gaps.sum(axis=1)
        k = int(np.argmin(objs))
        if objs[k] < best_obj:  # strict: keeps the lexicographically first
            best_obj = float(objs[k])
            best_assignment = assignments[k].copy()

    schedule = HarvestSchedule(best_assignment)
    dev = _deviations(schedule, vols, demand)
    gaps = w * (dev - asp)
    cheb = max(float(gaps.max()), 0.0)
    return SolveOutcome(
        status="optimal",
        schedule=schedule,
        deviations=dev,
        chebyshev=cheb,
        objective=best_obj,
        bound=best_obj,
        nodes=count,
        wall_time_s=time.monotonic() - start,
    )


def _deviations(schedule: HarvestSchedule, vols: np.ndarray, demand: np.ndarray) -> np.ndarray:
    s, n_a, n_s = vols.shape
    n_t = demand.shape[1]
    prod = np.zeros((n_a, n_t, s))
    for p in range(s):
        mask = schedule.assignment > 0
        if mask.any():
            periods = schedule.assignment[mask] - 1
            for a in range(n_a):
                prod[a, :, p] = np.bincount(
                    periods, weights=vols[p, a, mask], minlength=n_t
                )
    return np.abs(prod - demand[:, :, None]).reshape(-1)
