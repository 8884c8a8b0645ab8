"""Scenario construction: named bracketing scenarios and sampled cohorts.

Each uncertain stand/assortment volume is only known as an interval
[mean - sd, mean + sd].  Three named scenarios bracket the uncertainty
(worst = all lowest plausible volumes, nominal = all means, best = all
highest), and a large uniformly sampled cohort drives stress testing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .model import ProblemInstance, _freeze
from .rng import KeyedStream

#: Bump when the sampling scheme changes; cohorts embed it so stale artifacts
#: cannot silently mix with new code.
GENERATOR_VERSION = "philox-u53/1"

SampleMode = Literal["clamp", "truncate"]


@dataclass(frozen=True)
class Scenario:
    """One full realization of all uncertain volumes, shape (n_A, n_S)."""

    id: str
    volumes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "volumes", _freeze(self.volumes))


@dataclass(frozen=True)
class ScenarioCohort:
    scenarios: tuple[Scenario, ...]
    seed: int
    generator_version: str = GENERATOR_VERSION

    def __post_init__(self):
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        ids = [s.id for s in self.scenarios]
        if len(set(ids)) != len(ids):
            raise ValueError("scenario ids must be unique within a cohort")

    def __len__(self) -> int:
        return len(self.scenarios)

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.scenarios]

    def volume_tensor(self) -> np.ndarray:
        """Stacked volumes, shape (n_scenarios, n_A, n_S)."""
        if not self.scenarios:
            return np.zeros((0, 0, 0))
        return np.stack([s.volumes for s in self.scenarios], axis=0)


def named_scenarios(instance: ProblemInstance) -> tuple[Scenario, Scenario, Scenario]:
    """(worst, nominal, best) volumes: max(mean - sd, 0), mean, mean + sd."""
    mean, sd = instance.volume_stats()
    worst = Scenario("worst", np.maximum(mean - sd, 0.0))
    nominal = Scenario("nominal", mean)
    best = Scenario("best", mean + sd)
    return worst, nominal, best


def sample_scenario(
    instance: ProblemInstance, seed: int, index: int, mode: SampleMode = "clamp"
) -> Scenario:
    """Draw one scenario. Deterministic in (instance stats, seed, index, mode).

    Volumes are drawn uniformly and independently from
    [mean - sd, mean + sd], assortment-major then stand.  ``clamp`` maps
    negative draws to 0; ``truncate`` draws from [max(mean - sd, 0), mean + sd]
    instead.
    """
    mean, sd = instance.volume_stats()
    n_a, n_s = mean.shape
    stream = KeyedStream(seed, tag=f"scenario/{mode}", index=index)
    u = stream.uniforms(n_a * n_s).reshape(n_a, n_s)
    if mode == "clamp":
        low = mean - sd
        vols = np.maximum(low + u * (2.0 * sd), 0.0)
    elif mode == "truncate":
        low = np.maximum(mean - sd, 0.0)
        vols = low + u * (mean + sd - low)
    else:
        raise ValueError(f"unknown sample mode {mode!r}")
    return Scenario(f"sample-{index:04d}", vols)


def sample_cohort(
    instance: ProblemInstance, count: int, seed: int, mode: SampleMode = "clamp"
) -> ScenarioCohort:
    """A cohort of ``count`` independently sampled scenarios."""
    if count < 0:
        raise ValueError("count must be >= 0")
    scenarios = tuple(sample_scenario(instance, seed, k, mode) for k in range(count))
    return ScenarioCohort(scenarios, seed=seed)


def stress_cohort(
    instance: ProblemInstance, total: int, seed: int, mode: SampleMode = "clamp"
) -> ScenarioCohort:
    """The stress-testing cohort: the 3 named scenarios plus sampled ones.

    ``total`` counts all members, so e.g. total=1000 yields worst/nominal/best
    followed by 997 samples.
    """
    if total < 3:
        raise ValueError("stress cohort needs room for the 3 named scenarios")
    named = named_scenarios(instance)
    sampled = sample_cohort(instance, total - 3, seed, mode)
    return ScenarioCohort(named + sampled.scenarios, seed=seed)
