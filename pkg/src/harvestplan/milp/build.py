"""Mixed-integer model construction for the scalarized scheduling problem.

Two model kinds are built here:

* the full scalarized model: binary stand/period assignments, one deviation
  variable per (assortment, period, scenario) objective, and a single scalar
  variable that carries the weighted worst-case (Chebyshev) term, minimized
  together with a small augmentation sum that guarantees Pareto optimality;
* single-objective models: minimize one deviation for one scenario, used for
  ideal-point computation.

Models are plain dense descriptions (rows, senses, bounds, integrality) so
the bundled solver and the LP-file exporter can both consume them, and an
external solver could be slotted in behind the same structure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..model import (
    DimensionMismatch,
    HarvestSchedule,
    MetaObjectiveKey,
    ProblemInstance,
    evaluate_schedule,
)
from ..scenarios import Scenario

# Row senses.
LE, EQ, GE = 0, 1, 2
_SENSE_TEXT = {LE: "<=", EQ: "=", GE: ">="}

DEFAULT_EPSILON = 1e-4


@dataclass(frozen=True)
class ReferenceConfig:
    """Aspiration levels, importance weights and the augmentation coefficient.

    Arrays are indexed (assortment, period, scenario).  Aspirations default
    to zero: objectives are deviations whose best achievable values approach
    zero, so zero is the natural reference.
    """

    aspirations: np.ndarray
    weights: np.ndarray
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        asp = np.asarray(self.aspirations, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if asp.shape != w.shape:
            raise DimensionMismatch(
                f"aspirations {asp.shape} and weights {w.shape} must have equal shape"
            )
        if not np.all(w > 0):
            raise ValueError("all importance weights must be > 0")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        object.__setattr__(self, "aspirations", asp)
        object.__setattr__(self, "weights", w)

    @classmethod
    def neutral(
        cls,
        instance: ProblemInstance,
        n_scenarios: int,
        epsilon: float = DEFAULT_EPSILON,
    ) -> "ReferenceConfig":
        shape = (instance.n_assortments, instance.n_periods, n_scenarios)
        return cls(np.zeros(shape), np.ones(shape), epsilon)

    def with_weights(self, weights: np.ndarray) -> "ReferenceConfig":
        return ReferenceConfig(self.aspirations, weights, self.epsilon)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.aspirations.shape


@dataclass
class MilpModel:
    """Dense description of a mixed-integer linear program (all rows <=/=/>=)."""

    objective: np.ndarray  # (n_vars,)
    objective_constant: float
    rows: np.ndarray  # (n_rows, n_vars)
    senses: np.ndarray  # (n_rows,) int8, see LE/EQ/GE
    rhs: np.ndarray  # (n_rows,)
    lower: np.ndarray  # (n_vars,)
    upper: np.ndarray  # (n_vars,) may be +inf
    is_integer: np.ndarray  # (n_vars,) bool
    var_names: list[str]
    row_names: list[str]
    meta: "ModelMeta"

    @property
    def n_vars(self) -> int:
        return self.objective.size

    @property
    def n_rows(self) -> int:
        return self.rhs.size

    @property
    def n_binary(self) -> int:
        return int(self.is_integer.sum())

    @property
    def n_continuous(self) -> int:
        return self.n_vars - self.n_binary

    def sense_text(self, row: int) -> str:
        return _SENSE_TEXT[int(self.senses[row])]


@dataclass
class ModelMeta:
    """Everything needed to map solver vectors back to the domain.

    ``scenario_volumes`` has shape (s, n_A, n_S); ``meta_keys`` lists the
    (assortment, period, scenario) objective behind each deviation column in
    canonical order.
    """

    kind: str  # "scalarized" | "single-objective"
    n_stands: int
    n_periods: int
    n_assortments: int
    n_scenarios: int
    instance: ProblemInstance
    scenario_volumes: np.ndarray
    meta_keys: list[MetaObjectiveKey]
    x_columns: np.ndarray  # (n_stands, periods-in-model) column index of each binary
    deviation_columns: np.ndarray  # column index per meta objective
    chebyshev_column: int | None
    reference: ReferenceConfig | None
    fixed_period: int | None = None  # single-objective models only
    crash_basis: list[tuple[int, int]] = field(default_factory=list)  # (row, column)

    def schedule_from_values(self, values: np.ndarray, tol: float = 0.5) -> HarvestSchedule:
        """Round binary values to a schedule (at most one period per stand)."""
        assignment = np.zeros(self.n_stands, dtype=np.int64)
        if self.x_columns.size:
            x = values[self.x_columns]  # (n_stands, periods-in-model)
            best = np.argmax(x, axis=1)
            chosen = x[np.arange(self.n_stands), best] > tol
            if self.kind == "single-objective":
                assignment[chosen] = self.fixed_period
            else:
                assignment[chosen] = best[chosen] + 1
        return HarvestSchedule(assignment)

    def deviations_of(self, schedule: HarvestSchedule) -> np.ndarray:
        """Exact per-meta-objective deviations of a schedule, in model order."""
        out = np.empty(len(self.meta_keys))
        per_scenario = {}
        for i, key in enumerate(self.meta_keys):
            p = key.scenario
            if p not in per_scenario:
                per_scenario[p] = evaluate_schedule(
                    schedule, self.scenario_volumes[p - 1], self.instance
                )
            out[i] = per_scenario[p][key.assortment - 1, key.period - 1]
        return out

    def objective_of(self, schedule: HarvestSchedule) -> tuple[float, float, np.ndarray]:
        """(objective, chebyshev term, deviations) of a schedule under this model."""
        dev = self.deviations_of(schedule)
        if self.kind == "single-objective":
            return float(dev[0]), float(dev[0]), dev
        ref = self.reference
        obj, cheb = scalarized_objective(
            dev, ref.weights.reshape(-1), ref.aspirations.reshape(-1), ref.epsilon
        )
        return obj, cheb, dev


def scalarized_objective(
    deviations: np.ndarray,
    weights: np.ndarray,
    aspirations: np.ndarray,
    epsilon: float,
) -> tuple[float, float]:
    """Objective value of a fixed schedule: worst weighted gap plus augmentation.

    The Chebyshev term is clamped at zero because the scalar variable that
    carries it in the MILP is nonnegative.
    """
    gaps = weights * (deviations - aspirations)
    cheb = max(float(gaps.max()), 0.0) if gaps.size else 0.0
    return cheb + epsilon * float(gaps.sum()), cheb


def build_scalarized_milp(
    instance: ProblemInstance,
    scenarios: Sequence[Scenario],
    reference: ReferenceConfig,
) -> MilpModel:
    """Assemble the scalarized model over the given optimization scenarios.

    Layout: binaries x[j,t] first (stand-major), then one deviation variable
    per meta objective in canonical order, then the Chebyshev scalar.  Rows:
    k Chebyshev link rows, 2k absolute-value rows (upper then lower, grouped
    per objective), then one assignment row per stand.
    """
    n_s, n_t, n_a = instance.n_stands, instance.n_periods, instance.n_assortments
    s = len(scenarios)
    if s < 1:
        raise DimensionMismatch("need at least one scenario")
    if reference.shape != (n_a, n_t, s):
        raise DimensionMismatch(
            f"reference shape {reference.shape} does not match ({n_a}, {n_t}, {s})"
        )
    vols = np.stack([np.asarray(sc.volumes, dtype=float) for sc in scenarios], axis=0)
    if vols.shape != (s, n_a, n_s):
        raise DimensionMismatch(
            f"scenario volumes {vols.shape} do not match (s={s}, n_A={n_a}, n_S={n_s})"
        )

    k = n_a * n_t * s
    n_x = n_s * n_t
    n_vars = n_x + k + 1
    cheb_col = n_x + k
    x_cols = np.arange(n_x).reshape(n_s, n_t)
    dev_cols = n_x + np.arange(k)

    keys = [MetaObjectiveKey.from_index(i, n_t, s) for i in range(k)]
    w = reference.weights.reshape(-1)  # canonical order matches key order
    asp = reference.aspirations.reshape(-1)
    demand = instance.demand.values

    n_rows = 3 * k + n_s
    rows = np.zeros((n_rows, n_vars))
    senses = np.full(n_rows, LE, dtype=np.int8)
    rhs = np.zeros(n_rows)
    row_names: list[str] = []

    def _x_name(j: int, t: int) -> str:
        return f"x_{j + 1}_{t + 1}"

    var_names = [_x_name(j, t) for j in range(n_s) for t in range(n_t)]
    var_names += [f"dev_a{key.assortment}_t{key.period}_p{key.scenario}" for key in keys]
    var_names.append("worst")

    # Chebyshev link rows: w_i * dev_i - worst <= w_i * aspiration_i
    for i, key in enumerate(keys):
        rows[i, dev_cols[i]] = w[i]
        rows[i, cheb_col] = -1.0
        rhs[i] = w[i] * asp[i]
        row_names.append(f"link_a{key.assortment}_t{key.period}_p{key.scenario}")

    # Absolute-value rows per objective: production - dev <= D and
    # -production - dev <= -D.
    for i, key in enumerate(keys):
        a, t, p = key.assortment - 1, key.period - 1, key.scenario - 1
        d = demand[a, t]
        up, lo = k + 2 * i, k + 2 * i + 1
        if n_s:
            rows[up, x_cols[:, t]] = vols[p, a]
            rows[lo, x_cols[:, t]] = -vols[p, a]
        rows[up, dev_cols[i]] = -1.0
        rows[lo, dev_cols[i]] = -1.0
        rhs[up] = d
        rhs[lo] = -d
        row_names.append(f"above_a{key.assortment}_t{key.period}_p{key.scenario}")
        row_names.append(f"below_a{key.assortment}_t{key.period}_p{key.scenario}")

    # Assignment rows: each stand harvested at most once.
    for j in range(n_s):
        r = 3 * k + j
        rows[r, x_cols[j]] = 1.0
        rhs[r] = 1.0
        row_names.append(f"once_{j + 1}")

    objective = np.zeros(n_vars)
    objective[dev_cols] = reference.epsilon * w
    objective[cheb_col] = 1.0
    constant = -reference.epsilon * float((w * asp).sum())

    lower = np.zeros(n_vars)
    upper = np.full(n_vars, np.inf)
    upper[:n_x] = 1.0
    is_integer = np.zeros(n_vars, dtype=bool)
    is_integer[:n_x] = True

    # A primal-feasible starting basis at the all-unharvested point: each
    # deviation variable sits in its own lower absolute-value row (value D),
    # the Chebyshev scalar in the link row with the largest implied gap.
    crash = [(k + 2 * i + 1, int(dev_cols[i])) for i in range(k)]
    implied = w * (demand.reshape(n_a, n_t, 1).repeat(s, axis=2).reshape(-1) - asp)
    if implied.max() > 0:
        crash.append((int(np.argmax(implied)), cheb_col))

    meta = ModelMeta(
        kind="scalarized",
        n_stands=n_s,
        n_periods=n_t,
        n_assortments=n_a,
        n_scenarios=s,
        instance=instance,
        scenario_volumes=vols,
        meta_keys=keys,
        x_columns=x_cols,
        deviation_columns=dev_cols,
        chebyshev_column=cheb_col,
        reference=reference,
        crash_basis=crash,
    )
    return MilpModel(
        objective=objective,
        objective_constant=constant,
        rows=rows,
        senses=senses,
        rhs=rhs,
        lower=lower,
        upper=upper,
        is_integer=is_integer,
        var_names=var_names,
        row_names=row_names,
        meta=meta,
    )


def build_single_objective_milp(
    instance: ProblemInstance,
    scenario: Scenario,
    assortment: int,
    period: int,
    scenario_index: int = 1,
) -> MilpModel:
    """Minimize one (assortment, period) deviation under one scenario.

    Only that period's binaries appear; the at-most-once assignment rows
    reduce to the x <= 1 variable bounds, so the model has exactly the two
    absolute-value rows.
    """
    n_s, n_a = instance.n_stands, instance.n_assortments
    if not (1 <= assortment <= n_a) or not (1 <= period <= instance.n_periods):
        raise DimensionMismatch(
            f"objective (a={assortment}, t={period}) outside instance shape"
        )
    vols = np.asarray(scenario.volumes, dtype=float)
    if vols.shape != (n_a, n_s):
        raise DimensionMismatch(
            f"scenario volumes {vols.shape} do not match ({n_a}, {n_s})"
        )
    v = vols[assortment - 1]
    d = float(instance.demand.values[assortment - 1, period - 1])

    n_vars = n_s + 1
    dev_col = n_s
    rows = np.zeros((2, n_vars))
    rows[0, :n_s] = v
    rows[0, dev_col] = -1.0
    rows[1, :n_s] = -v
    rows[1, dev_col] = -1.0
    rhs = np.array([d, -d])
    senses = np.full(2, LE, dtype=np.int8)

    objective = np.zeros(n_vars)
    objective[dev_col] = 1.0
    lower = np.zeros(n_vars)
    upper = np.full(n_vars, np.inf)
    upper[:n_s] = 1.0
    is_integer = np.zeros(n_vars, dtype=bool)
    is_integer[:n_s] = True

    key = MetaObjectiveKey(assortment, period, scenario_index)
    var_names = [f"x_{j + 1}_{period}" for j in range(n_s)]
    var_names.append(f"dev_a{assortment}_t{period}_p{scenario_index}")

    meta = ModelMeta(
        kind="single-objective",
        n_stands=n_s,
        n_periods=instance.n_periods,
        n_assortments=n_a,
        n_scenarios=1,
        instance=instance,
        scenario_volumes=vols[None, :, :],
        meta_keys=[key],
        x_columns=np.arange(n_s).reshape(n_s, 1),
        deviation_columns=np.array([dev_col]),
        chebyshev_column=None,
        reference=None,
        fixed_period=period,
        crash_basis=[(1, dev_col)],
    )
    return MilpModel(
        objective=objective,
        objective_constant=0.0,
        rows=rows,
        senses=senses,
        rhs=rhs,
        lower=lower,
        upper=upper,
        is_integer=is_integer,
        var_names=var_names,
        row_names=[f"above_a{assortment}_t{period}", f"below_a{assortment}_t{period}"],
        meta=meta,
    )
