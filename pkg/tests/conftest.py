"""Shared builders for small test instances."""

from __future__ import annotations

import numpy as np
import pytest

from harvestplan.model import (
    Assortment,
    DemandTable,
    ProblemInstance,
    StandRecord,
    validate_instance,
)


def make_instance(
    means: np.ndarray,
    sds: np.ndarray | None = None,
    demand: np.ndarray | None = None,
    n_periods: int | None = None,
    names: list[str] | None = None,
) -> ProblemInstance:
    """Instance from a (n_A, n_S) mean-volume array; sds default to zero."""
    means = np.atleast_2d(np.asarray(means, dtype=float))
    n_a, n_s = means.shape
    if sds is None:
        sds = np.zeros_like(means)
    else:
        sds = np.atleast_2d(np.asarray(sds, dtype=float))
    if names is None:
        names = [f"assort{a + 1}" for a in range(n_a)]
    if demand is not None:
        demand = np.atleast_2d(np.asarray(demand, dtype=float))
        n_t = demand.shape[1]
    else:
        n_t = n_periods or 1
        demand = np.tile(means.sum(axis=1, keepdims=True) / (2 * n_t), (1, n_t))
    assortments = [Assortment(a + 1, names[a]) for a in range(n_a)]
    stands = [
        StandRecord(j + 1, 1.0, means[:, j].copy(), sds[:, j].copy())
        for j in range(n_s)
    ]
    return validate_instance(
        ProblemInstance(tuple(stands), tuple(assortments), n_t, DemandTable(demand))
    )


def random_micro_instance(rng: np.random.Generator, max_enum: int = 200_000):
    """Random instance small enough for exhaustive enumeration.

    Shapes stay within n_S <= 12, n_T <= 3, n_A <= 2 while keeping
    (n_T + 1)^n_S below ``max_enum``.
    """
    n_t = int(rng.integers(1, 4))
    cap = int(np.floor(np.log(max_enum) / np.log(n_t + 1)))
    n_s = int(rng.integers(1, min(12, cap) + 1))
    n_a = int(rng.integers(1, 3))
    means = rng.uniform(0.0, 120.0, size=(n_a, n_s))
    sds = rng.uniform(0.0, 0.35, size=(n_a, n_s)) * means
    demand = rng.uniform(0.0, means.sum(axis=1) * 0.8)[:, None] * np.ones((1, n_t))
    # Occasionally make demand per-period distinct.
    if rng.random() < 0.5:
        demand = demand * rng.uniform(0.5, 1.5, size=(n_a, n_t))
    return make_instance(means, sds, demand)


@pytest.fixture
def tiny_instance() -> ProblemInstance:
    """1 assortment, 3 stands of volume 10/20/30, demand 30 in 2 periods."""
    return make_instance(
        np.array([[10.0, 20.0, 30.0]]),
        demand=np.array([[30.0, 30.0]]),
    )
