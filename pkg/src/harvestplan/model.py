"""Core data model for tactical harvest scheduling.

A planning problem consists of forest stands (each with per-assortment volume
statistics), a set of timber assortments, a monthly planning horizon, and a
demand table.  A harvest schedule assigns each stand to at most one period;
its quality under a volume realization is the absolute deviation between the
harvested volume and the demand, per assortment and period.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

# Absolute tolerance for m3-scale equality comparisons.  Per-objective optima
# can legitimately reach ~1e-8 m3, so comparisons sit well below that.
EQUALITY_TOL_M3 = 1e-9

#: Assignment value meaning "stand is not harvested"; periods are 1-based.
UNHARVESTED = 0


class DimensionMismatch(ValueError):
    """Array shapes or index ranges do not match the problem instance."""


class InstanceValidationError(ValueError):
    """Raised by :func:`validate_instance`; carries the full violation report."""

    def __init__(self, violations: list["Violation"]):
        self.violations = violations
        lines = "; ".join(str(v) for v in violations)
        super().__init__(f"{len(violations)} violation(s): {lines}")


@dataclass(frozen=True)
class Violation:
    """One invariant failure with coordinates pointing at the offending data."""

    code: str  # NegativeVolumeStat | DimensionMismatch | EmptyInstance | ...
    message: str
    where: dict = field(default_factory=dict)

    def __str__(self) -> str:
        if self.where:
            coords = ", ".join(f"{k}={v}" for k, v in self.where.items())
            return f"{self.code}[{coords}]: {self.message}"
        return f"{self.code}: {self.message}"


@dataclass(frozen=True)
class Assortment:
    """A timber product class (e.g. pine, spruce, deciduous)."""

    id: int  # 1-based, contiguous
    name: str


@dataclass(frozen=True)
class StandRecord:
    """One forest management unit with per-assortment volume statistics."""

    id: int
    area_ha: float
    volume_mean: np.ndarray  # (n_assortments,) m3
    volume_sd: np.ndarray  # (n_assortments,) m3

    def __post_init__(self):
        object.__setattr__(self, "volume_mean", _freeze(self.volume_mean))
        object.__setattr__(self, "volume_sd", _freeze(self.volume_sd))


@dataclass(frozen=True)
class DemandTable:
    """Required delivery volume per assortment and period, in m3."""

    values: np.ndarray  # (n_assortments, n_periods)

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values))

    @property
    def n_assortments(self) -> int:
        return self.values.shape[0]

    @property
    def n_periods(self) -> int:
        return self.values.shape[1]

    def is_period_uniform(self, tol: float = EQUALITY_TOL_M3) -> bool:
        """True when every assortment has the same demand in all periods."""
        if self.n_periods == 0:
            return True
        return bool(np.all(np.abs(self.values - self.values[:, :1]) <= tol))


@dataclass(frozen=True)
class ProblemInstance:
    """The deterministic skeleton of a harvest scheduling problem."""

    stands: tuple[StandRecord, ...]
    assortments: tuple[Assortment, ...]
    n_periods: int
    demand: DemandTable

    def __post_init__(self):
        object.__setattr__(self, "stands", tuple(self.stands))
        object.__setattr__(self, "assortments", tuple(self.assortments))

    @property
    def n_stands(self) -> int:
        return len(self.stands)

    @property
    def n_assortments(self) -> int:
        return len(self.assortments)

    def volume_stats(self) -> tuple[np.ndarray, np.ndarray]:
        """Stack per-stand statistics into (mean, sd) arrays of shape (n_A, n_S)."""
        if self.n_stands == 0:
            shape = (self.n_assortments, 0)
            return np.zeros(shape), np.zeros(shape)
        mean = np.stack([s.volume_mean for s in self.stands], axis=1)
        sd = np.stack([s.volume_sd for s in self.stands], axis=1)
        return mean, sd


@dataclass(frozen=True)
class HarvestSchedule:
    """Dense per-stand assignment: 0 = unharvested, otherwise a 1-based period.

    Storing one period index per stand makes "each stand is harvested at most
    once" true by construction.
    """

    assignment: np.ndarray  # (n_stands,) int

    def __post_init__(self):
        arr = np.asarray(self.assignment, dtype=np.int64)
        if arr.ndim != 1:
            raise DimensionMismatch("schedule assignment must be 1-D")
        if arr.size and arr.min() < 0:
            raise ValueError("assignment values must be >= 0")
        object.__setattr__(self, "assignment", _freeze_int(arr))

    @classmethod
    def unharvested(cls, n_stands: int) -> "HarvestSchedule":
        return cls(np.zeros(n_stands, dtype=np.int64))

    @classmethod
    def from_pairs(cls, n_stands: int, pairs: Sequence[tuple[int, int]]) -> "HarvestSchedule":
        """Build from (stand_id, period) pairs, both 1-based; omitted stands stay unharvested."""
        arr = np.zeros(n_stands, dtype=np.int64)
        for stand_id, period in pairs:
            arr[stand_id - 1] = period
        return cls(arr)

    @property
    def n_stands(self) -> int:
        return int(self.assignment.size)

    def harvested_count(self) -> int:
        return int(np.count_nonzero(self.assignment))

    def indicator(self, n_periods: int) -> np.ndarray:
        """Binary matrix (n_stands, n_periods): 1 where stand j goes to period t."""
        ind = np.zeros((self.n_stands, n_periods))
        mask = self.assignment > 0
        ind[np.nonzero(mask)[0], self.assignment[mask] - 1] = 1.0
        return ind


@dataclass(frozen=True)
class MetaObjectiveKey:
    """One (assortment, period, scenario) objective, all indices 1-based.

    The canonical linear index is assortment-major, then period, then
    scenario, so all scenario copies of one physical objective sit next to
    each other.
    """

    assortment: int
    period: int
    scenario: int

    def to_index(self, n_periods: int, n_scenarios: int) -> int:
        """0-based canonical index."""
        return ((self.assortment - 1) * n_periods + (self.period - 1)) * n_scenarios + (
            self.scenario - 1
        )

    @classmethod
    def from_index(cls, index: int, n_periods: int, n_scenarios: int) -> "MetaObjectiveKey":
        p = index % n_scenarios
        rest = index // n_scenarios
        t = rest % n_periods
        a = rest // n_periods
        return cls(assortment=a + 1, period=t + 1, scenario=p + 1)


def meta_objective_count(instance: ProblemInstance, n_scenarios: int) -> int:
    return instance.n_assortments * instance.n_periods * n_scenarios


def _freeze(values) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


def _freeze_int(values) -> np.ndarray:
    arr = np.array(values, dtype=np.int64, copy=True)
    arr.setflags(write=False)
    return arr


# ---------------------------------------------------------------------------
# Validation


def collect_violations(instance: ProblemInstance) -> list[Violation]:
    """Check every instance invariant and return all failures (possibly none)."""
    out: list[Violation] = []
    n_a = instance.n_assortments
    n_s = instance.n_stands
    n_t = instance.n_periods

    if n_s == 0 or n_t == 0 or n_a == 0:
        out.append(
            Violation(
                "EmptyInstance",
                f"need at least one stand, period and assortment (got {n_s}, {n_t}, {n_a})",
            )
        )

    for pos, a in enumerate(instance.assortments, start=1):
        if a.id != pos:
            out.append(
                Violation(
                    "DimensionMismatch",
                    f"assortment ids must be contiguous from 1 (got {a.id} at position {pos})",
                    {"assortment": a.id},
                )
            )
    names = [a.name for a in instance.assortments]
    if len(set(names)) != len(names):
        out.append(Violation("DimensionMismatch", f"assortment names not unique: {names}"))

    for pos, stand in enumerate(instance.stands, start=1):
        if stand.id != pos:
            out.append(
                Violation(
                    "DimensionMismatch",
                    f"stand ids must be contiguous from 1 (got {stand.id} at position {pos})",
                    {"stand": stand.id},
                )
            )
        if not np.isfinite(stand.area_ha) or stand.area_ha <= 0:
            out.append(
                Violation(
                    "NegativeVolumeStat",
                    f"stand area must be > 0 ha (got {stand.area_ha})",
                    {"stand": stand.id},
                )
            )
        for label, arr in (("mean", stand.volume_mean), ("sd", stand.volume_sd)):
            if arr.shape != (n_a,):
                out.append(
                    Violation(
                        "DimensionMismatch",
                        f"volume {label} must have one entry per assortment "
                        f"(got shape {arr.shape}, expected ({n_a},))",
                        {"stand": stand.id},
                    )
                )
                continue
            for a_idx in range(n_a):
                v = arr[a_idx]
                if not np.isfinite(v) or v < 0:
                    out.append(
                        Violation(
                            "NegativeVolumeStat",
                            f"volume {label} must be >= 0 m3 (got {v})",
                            {"stand": stand.id, "assortment": a_idx + 1},
                        )
                    )

    dem = instance.demand.values
    if dem.shape != (n_a, n_t):
        out.append(
            Violation(
                "DimensionMismatch",
                f"demand table must be {n_a}x{n_t}, got {dem.shape[0]}x{dem.shape[1]}",
            )
        )
    else:
        bad = np.argwhere(~(np.isfinite(dem) & (dem >= 0)))
        for a_idx, t_idx in bad:
            out.append(
                Violation(
                    "NegativeVolumeStat",
                    f"demand must be finite and >= 0 (got {dem[a_idx, t_idx]})",
                    {"assortment": int(a_idx) + 1, "period": int(t_idx) + 1},
                )
            )
    return out


def validate_instance(instance: ProblemInstance) -> ProblemInstance:
    """Return the instance unchanged iff every invariant holds.

    Otherwise raise :class:`InstanceValidationError` whose ``violations``
    attribute lists every failure with stand/assortment/period coordinates.
    """
    violations = collect_violations(instance)
    if violations:
        raise InstanceValidationError(violations)
    return instance


# ---------------------------------------------------------------------------
# Schedule evaluation


def _check_schedule(schedule: HarvestSchedule, instance: ProblemInstance) -> None:
    if schedule.n_stands != instance.n_stands:
        raise DimensionMismatch(
            f"schedule covers {schedule.n_stands} stands, instance has {instance.n_stands}"
        )
    if schedule.assignment.size and schedule.assignment.max() > instance.n_periods:
        raise DimensionMismatch(
            f"schedule assigns period {int(schedule.assignment.max())}, "
            f"instance has {instance.n_periods} periods"
        )


def harvested_volume(
    schedule: HarvestSchedule, volumes: np.ndarray, instance: ProblemInstance
) -> np.ndarray:
    """Total harvested volume per (assortment, period) for given realized volumes.

    ``volumes`` has shape (n_assortments, n_stands).  Summation is done in
    stand order, so identical inputs give bit-identical outputs.
    """
    V = np.asarray(volumes, dtype=float)
    _check_schedule(schedule, instance)
    if V.shape != (instance.n_assortments, instance.n_stands):
        raise DimensionMismatch(
            f"volume array has shape {V.shape}, expected "
            f"({instance.n_assortments}, {instance.n_stands})"
        )
    prod = np.zeros((instance.n_assortments, instance.n_periods))
    mask = schedule.assignment > 0
    if mask.any():
        periods = schedule.assignment[mask] - 1
        for a in range(instance.n_assortments):
            prod[a] = np.bincount(periods, weights=V[a, mask], minlength=instance.n_periods)
    return prod


def evaluate_schedule(
    schedule: HarvestSchedule, volumes: np.ndarray, instance: ProblemInstance
) -> np.ndarray:
    """Absolute demand deviation |harvested - demand| per (assortment, period), m3."""
    prod = harvested_volume(schedule, volumes, instance)
    return np.abs(prod - instance.demand.values)


def stand_count_summary(schedule: HarvestSchedule, instance: ProblemInstance) -> np.ndarray:
    """Number of stands harvested in each period, shape (n_periods,)."""
    _check_schedule(schedule, instance)
    mask = schedule.assignment > 0
    return np.bincount(
        schedule.assignment[mask] - 1, minlength=instance.n_periods
    ).astype(np.int64)
