"""Branch and bound over the LP relaxation, with rounding/local-search heuristics.

Node selection is best-bound (with an optional plunge that dives into one
child before returning to the heap, which saves basis refactorizations);
branching picks the most fractional binary, ties broken by lowest column
index.  All tie-breaking is index-based, so searches are reproducible.

Incumbents are always re-evaluated directly from the rounded schedule, never
read off LP values, so reported objectives are exact for the returned plan.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field

import numpy as np

from ..model import HarvestSchedule
from . import _ls_kernels
from .build import MilpModel, scalarized_objective
from .simplex import (
    BasisSnapshot,
    IterationLimit,
    SimplexSolver,
    StandardForm,
)

#: Fixed perturbation seed for the iterated local search: heuristics must be
#: deterministic so archives reproduce run to run.
ILS_SEED = 0x2545F4914F6CDD1D

#: Absolute objective tolerance used for "equal objective" tie-breaking.
TIE_TOL = 1e-9


@dataclass(frozen=True)
class SolveOptions:
    integrality_tol: float = 1e-6
    rel_gap_tol: float = 1e-6
    node_limit: int | None = None
    time_limit_s: float | None = None
    branching: str = "most-fractional"
    node_selection: str = "best-bound"
    plunge_depth: int = 8
    heuristic: bool = True
    heuristic_interval: int = 50
    improvement_passes: int = 40
    swap_passes: int = 2
    ils_rounds: int = 60
    ils_kick: int = 12
    polish_rounds: int = 20
    polish_free: int = 12
    polish_node_limit: int = 300
    lp_iteration_limit: int = 200_000

    def __post_init__(self):
        if self.integrality_tol <= 0 or self.rel_gap_tol < 0:
            raise ValueError("tolerances must be positive")
        if self.branching != "most-fractional":
            raise ValueError(f"unknown branching rule {self.branching!r}")
        if self.node_selection != "best-bound":
            raise ValueError(f"unknown node selection {self.node_selection!r}")


@dataclass
class SolveOutcome:
    status: str  # optimal | gap-limit | node-limit | time-limit | infeasible
    schedule: HarvestSchedule | None
    deviations: np.ndarray | None  # per meta objective, model order
    chebyshev: float | None
    objective: float | None
    bound: float
    nodes: int
    wall_time_s: float
    lp_iterations: int = 0

    @property
    def gap(self) -> float:
        if self.objective is None:
            return float("inf")
        return (self.objective - self.bound) / max(1.0, abs(self.objective))


# ---------------------------------------------------------------------------
# Incremental schedule evaluation (drives the local-search heuristics)


class ScheduleEvaluator:
    """Tracks harvested volume per (assortment, period, scenario) so that
    moving one stand re-prices the objective in O(k) instead of O(n_S)."""

    def __init__(self, model: MilpModel):
        meta = model.meta
        self.meta = meta
        self.n_stands = meta.n_stands
        self.n_periods = meta.n_periods if meta.kind == "scalarized" else 1
        # volumes laid out (n_A, s, n_S) so a stand's contribution is a slice
        self.vol = np.ascontiguousarray(np.transpose(meta.scenario_volumes, (1, 0, 2)))
        n_a, s, _ = self.vol.shape
        if meta.kind == "scalarized":
            ref = meta.reference
            self.weights = ref.weights  # (n_A, n_T, s)
            self.aspirations = ref.aspirations
            self.epsilon = ref.epsilon
            self.demand = meta.instance.demand.values  # (n_A, n_T)
        else:
            key = meta.meta_keys[0]
            self.weights = np.ones((n_a, 1, s))
            self.aspirations = np.zeros((n_a, 1, s))
            self.epsilon = 0.0
            self.single_key = key
        self.assignment: np.ndarray | None = None
        self.prod: np.ndarray | None = None  # (n_A, n_T, s)

    def reset(self, schedule: HarvestSchedule) -> None:
        meta = self.meta
        if meta.kind == "scalarized":
            self.assignment = schedule.assignment.astype(np.int64).copy()
        else:
            # Internally the single period is period 1.
            self.assignment = (schedule.assignment > 0).astype(np.int64)
        ind = np.zeros((self.n_stands, self.n_periods))
        mask = self.assignment > 0
        ind[np.nonzero(mask)[0], self.assignment[mask] - 1] = 1.0
        self.prod = np.einsum("paj,jt->atp", self.meta.scenario_volumes, ind)

    def _gaps(self, prod: np.ndarray) -> np.ndarray:
        if self.meta.kind == "scalarized":
            dev = np.abs(prod - self.demand[:, :, None])
        else:
            key = self.single_key
            d = self.meta.instance.demand.values[key.assortment - 1, key.period - 1]
            dev = np.abs(prod - d)
        return self.weights * (dev - self.aspirations)

    def objective(self) -> float:
        return self._score(self._gaps(self.prod))

    def _score(self, g: np.ndarray) -> float:
        if self.meta.kind == "single-objective":
            return float(g[self.single_key.assortment - 1, 0, 0])
        return max(float(g.max()), 0.0) + self.epsilon * float(g.sum())

    def candidate(self, stand: int, new_period: int) -> float:
        """Objective after moving one stand (0 = unharvest), without applying."""
        old = int(self.assignment[stand])
        if old == new_period:
            return self.objective()
        prod = self.prod.copy()
        v = self.vol[:, :, stand]  # (n_A, s)
        if old > 0:
            prod[:, old - 1, :] -= v
        if new_period > 0:
            prod[:, new_period - 1, :] += v
        return self._score(self._gaps(prod))

    def apply(self, stand: int, new_period: int) -> None:
        old = int(self.assignment[stand])
        v = self.vol[:, :, stand]
        if old > 0:
            self.prod[:, old - 1, :] -= v
        if new_period > 0:
            self.prod[:, new_period - 1, :] += v
        self.assignment[stand] = new_period

    def candidate_swap(self, j1: int, j2: int) -> float:
        """Objective after exchanging the periods of two stands."""
        t1, t2 = int(self.assignment[j1]), int(self.assignment[j2])
        if t1 == t2:
            return self.objective()
        prod = self.prod.copy()
        v1 = self.vol[:, :, j1]
        v2 = self.vol[:, :, j2]
        if t1 > 0:
            prod[:, t1 - 1, :] += v2 - v1
        if t2 > 0:
            prod[:, t2 - 1, :] += v1 - v2
        return self._score(self._gaps(prod))

    def apply_swap(self, j1: int, j2: int) -> None:
        t1, t2 = int(self.assignment[j1]), int(self.assignment[j2])
        self.apply(j1, t2)
        self.apply(j2, t1)

    def schedule(self) -> HarvestSchedule:
        if self.meta.kind == "single-objective":
            assignment = np.where(self.assignment > 0, self.meta.fixed_period, 0)
            return HarvestSchedule(assignment)
        return HarvestSchedule(self.assignment)


def _improve(
    ev: ScheduleEvaluator,
    move_passes: int,
    swap_passes: int,
    deadline: float | None,
) -> None:
    """First-improvement local search over single-stand moves, then swaps."""
    n_s = ev.n_stands
    n_t = ev.n_periods
    for _ in range(move_passes):
        improved = False
        current = ev.objective()
        for j in range(n_s):
            if deadline is not None and time.monotonic() > deadline:
                return
            best_t, best_val = -1, current
            old = int(ev.assignment[j])
            for t in range(n_t + 1):
                if t == old:
                    continue
                val = ev.candidate(j, t)
                if val < best_val - 1e-12:
                    best_t, best_val = t, val
            if best_t >= 0:
                ev.apply(j, best_t)
                current = best_val
                improved = True
        if not improved:
            break
    if n_t <= 1:
        return
    for _ in range(swap_passes):
        improved = False
        current = ev.objective()
        for j1 in range(n_s):
            if deadline is not None and time.monotonic() > deadline:
                return
            t1 = int(ev.assignment[j1])
            for j2 in range(j1 + 1, n_s):
                if int(ev.assignment[j2]) == t1:
                    continue
                val = ev.candidate_swap(j1, j2)
                if val < current - 1e-12:
                    ev.apply_swap(j1, j2)
                    current = val
                    improved = True
                    t1 = int(ev.assignment[j1])
        if not improved:
            break


def _subset_incumbent(model: MilpModel) -> HarvestSchedule:
    """Greedy + closest-swap start for single-objective (subset-sum) models."""
    meta = model.meta
    key = meta.meta_keys[0]
    v = meta.scenario_volumes[0, key.assortment - 1]  # (n_S,)
    d = float(meta.instance.demand.values[key.assortment - 1, key.period - 1])
    n = v.size
    chosen = np.zeros(n, dtype=bool)
    order = np.argsort(-v, kind="stable")
    total = 0.0
    for j in order:
        if total + v[j] <= d:
            chosen[j] = True
            total += v[j]
    gap = total - d  # signed
    for _ in range(200):
        best_gain = 0.0
        best_move = None
        inside = np.nonzero(chosen)[0]
        outside = np.nonzero(~chosen)[0]
        if outside.size:
            k = int(np.argmin(np.abs(gap + v[outside])))
            cand = abs(gap + v[outside[k]])
            if cand < abs(gap) - best_gain - 1e-15:
                best_gain = abs(gap) - cand
                best_move = ("add", outside[k], None)
        if inside.size:
            k = int(np.argmin(np.abs(gap - v[inside])))
            cand = abs(gap - v[inside[k]])
            if cand < abs(gap) - best_gain - 1e-15:
                best_gain = abs(gap) - cand
                best_move = ("drop", inside[k], None)
        if inside.size and outside.size:
            vi = v[inside]
            si = np.argsort(vi, kind="stable")
            vi_sorted = vi[si]
            targets = v[outside] + gap
            pos = np.searchsorted(vi_sorted, targets)
            best_pair_val = np.inf
            best_pair = None
            for off in (0, -1):
                idx = np.clip(pos + off, 0, vi_sorted.size - 1)
                cand_vals = np.abs(targets - vi_sorted[idx])
                k = int(np.argmin(cand_vals))
                if cand_vals[k] < best_pair_val:
                    best_pair_val = float(cand_vals[k])
                    best_pair = (outside[k], inside[si[idx[k]]])
            if best_pair is not None and best_pair_val < abs(gap) - best_gain - 1e-15:
                best_gain = abs(gap) - best_pair_val
                best_move = ("swap", best_pair[0], best_pair[1])
        if best_move is None:
            break
        kind, a, b = best_move
        if kind == "add":
            chosen[a] = True
            gap += v[a]
        elif kind == "drop":
            chosen[a] = False
            gap -= v[a]
        else:
            chosen[a] = True
            chosen[b] = False
            gap += v[a] - v[b]
    assignment = np.where(chosen, key.period, 0)
    return HarvestSchedule(assignment.astype(np.int64))


def _polish(
    model: MilpModel,
    schedule: HarvestSchedule,
    rounds: int,
    free_size: int,
    node_limit: int,
    deadline: float | None,
) -> HarvestSchedule:
    """Pocket polishing: free a handful of stands around the worst objective
    and place them optimally by exact enumeration, rotating through the worst
    objectives.  Escapes the local optima single-stand moves cannot leave.

    Deterministic: objectives are visited in gap order with a rotating
    window, stands picked by volume then index.  ``node_limit`` caps the
    pocket size through the enumeration budget (n_T + 1)^pocket.
    """
    meta = model.meta
    inst = meta.instance
    ref = meta.reference
    vols = meta.scenario_volumes  # (s, n_A, n_S)
    vol_lay = np.ascontiguousarray(np.transpose(vols, (1, 0, 2)))
    n_t = inst.n_periods
    nominal_idx = min(1, vols.shape[0] - 1)
    # Pocket size: largest count whose enumeration stays under ~2M states.
    pocket = max(2, min(free_size, int(np.log(2e6) / np.log(n_t + 1))))
    assignment = schedule.assignment.astype(np.int64).copy()
    best_obj, _, _ = meta.objective_of(HarvestSchedule(assignment))

    w_flat = ref.weights.reshape(-1)
    asp_flat = ref.aspirations.reshape(-1)
    for round_index in range(rounds):
        if deadline is not None and time.monotonic() > deadline:
            break
        dev = meta.deviations_of(HarvestSchedule(assignment))
        gaps = w_flat * (dev - asp_flat)
        order = np.argsort(-gaps, kind="stable")
        key = meta.meta_keys[int(order[round_index % min(8, order.size)])]
        a_idx, t_star = key.assortment - 1, key.period

        # Pocket: stands in the worst period (volume-ranked window rotates
        # across rounds) plus the best outside candidates.
        offset = (round_index // 8) % 3
        in_period = np.nonzero(assignment == t_star)[0]
        outside = np.nonzero(assignment != t_star)[0]
        nominal = vols[nominal_idx, a_idx]
        in_period = in_period[np.argsort(-nominal[in_period], kind="stable")]
        outside = outside[np.argsort(-nominal[outside], kind="stable")]
        take_in = pocket - pocket // 3
        free = list(in_period[offset : offset + take_in])
        free += list(outside[offset : offset + (pocket - len(free))])
        if len(free) < 2:
            continue
        free_arr = np.array(sorted(free), dtype=np.int64)

        candidate = assignment.copy()
        value = _ls_kernels.pocket_exact(
            candidate,
            free_arr,
            vol_lay,
            inst.demand.values,
            ref.weights,
            ref.aspirations,
            ref.epsilon,
        )
        if value < best_obj - TIE_TOL:
            best_obj = value
            assignment = candidate
    return HarvestSchedule(assignment)


# ---------------------------------------------------------------------------
# Branch and bound


@dataclass(order=True)
class _Node:
    bound: float
    seq: int
    overrides: dict = field(compare=False)  # column -> (lower, upper)
    basis: BasisSnapshot | None = field(compare=False)


class _Search:
    def __init__(self, model: MilpModel, options: SolveOptions):
        self.model = model
        self.options = options
        self.sf = StandardForm(model)
        self.solver = SimplexSolver(self.sf, iteration_limit=options.lp_iteration_limit)
        self.root_lower = self.sf.lower.copy()
        self.root_upper = self.sf.upper.copy()
        self.int_cols = np.nonzero(model.is_integer)[0]
        self.evaluator = ScheduleEvaluator(model)
        self.incumbent: HarvestSchedule | None = None
        self.incumbent_obj = np.inf
        self.discarded_min = np.inf
        self.nodes = 0
        self.lp_iterations = 0
        self.heap: list[_Node] = []
        self.seq = 0
        self.start = time.monotonic()
        self.deadline = (
            self.start + options.time_limit_s if options.time_limit_s else None
        )

    # -- incumbent handling -------------------------------------------------

    def _offer(self, schedule: HarvestSchedule) -> None:
        obj, _, _ = self.model.meta.objective_of(schedule)
        if obj < self.incumbent_obj - TIE_TOL:
            self.incumbent, self.incumbent_obj = schedule, obj
        elif (
            abs(obj - self.incumbent_obj) <= TIE_TOL
            and self.incumbent is not None
            and _lex_less(schedule.assignment, self.incumbent.assignment)
        ):
            self.incumbent, self.incumbent_obj = schedule, obj

    def _prune_slack(self) -> float:
        if not np.isfinite(self.incumbent_obj):
            return 0.0
        return self.options.rel_gap_tol * max(1.0, abs(self.incumbent_obj))

    def _run_heuristic(
        self, lp_values: np.ndarray, passes: int, swaps: int, rounds: int = 0
    ) -> None:
        if not self.options.heuristic:
            return
        schedule = self.model.meta.schedule_from_values(lp_values)
        meta = self.model.meta
        if _ls_kernels.NUMBA_AVAILABLE and meta.kind == "scalarized" and meta.n_stands:
            ref = meta.reference
            assignment = schedule.assignment.astype(np.int64).copy()
            _ls_kernels.iterated_search(
                assignment,
                self.evaluator.vol,
                meta.instance.demand.values,
                ref.weights,
                ref.aspirations,
                ref.epsilon,
                passes,
                swaps,
                rounds,
                self.options.ils_kick,
                ILS_SEED,
            )
            self._offer(HarvestSchedule(assignment))
            if rounds and self.options.polish_rounds:
                self._offer(
                    _polish(
                        self.model,
                        self.incumbent,
                        self.options.polish_rounds,
                        self.options.polish_free,
                        self.options.polish_node_limit,
                        self.deadline,
                    )
                )
            return
        self.evaluator.reset(schedule)
        _improve(self.evaluator, passes, swaps, self.deadline)
        self._offer(self.evaluator.schedule())

    # -- node machinery -------------------------------------------------------

    def _apply_overrides(self, overrides: dict) -> None:
        # Phase-1 fallbacks may have appended artificial columns since the
        # root bounds were captured; their frozen bounds are left untouched.
        n0 = self.root_lower.size
        self.sf.lower[:n0] = self.root_lower
        self.sf.upper[:n0] = self.root_upper
        for col, (lo, hi) in overrides.items():
            self.sf.lower[col] = lo
            self.sf.upper[col] = hi

    def _solve_current(
        self, basis: BasisSnapshot | None, in_place: bool = False
    ) -> tuple[str, float]:
        self.solver.iterations = 0
        if in_place:
            outcome = self.solver.reoptimize_in_place()
        elif basis is None:
            outcome = (
                self.solver.solve_with_basis_hint(self.model.meta.crash_basis)
                if self.model.meta.crash_basis
                else self.solver.solve_from_scratch()
            )
        else:
            outcome = self.solver.solve_warm(basis)
        if outcome == "iteration-limit":
            self.lp_iterations += self.solver.iterations
            self.solver.iterations = 0
            outcome = self.solver.solve_from_scratch()
        self.lp_iterations += self.solver.iterations
        if outcome == "iteration-limit":
            raise IterationLimit("LP iteration limit inside branch and bound")
        if outcome == "unbounded":
            raise IterationLimit("unexpected unbounded relaxation")
        value = self.solver.objective() if outcome == "optimal" else np.inf
        return outcome, value

    def _fractional_column(self, values: np.ndarray) -> int | None:
        if self.int_cols.size == 0:
            return None
        x = values[self.int_cols]
        frac = np.minimum(x - np.floor(x), np.ceil(x) - x)
        worst = int(np.argmax(frac))
        if frac[worst] <= self.options.integrality_tol:
            return None
        return int(self.int_cols[worst])

    def _branch(
        self, overrides: dict, col: int, value: float, basis: BasisSnapshot
    ) -> tuple[_Node, _Node]:
        lo_child = dict(overrides)
        lo_child[col] = (self.root_lower[col], float(np.floor(value)))
        hi_child = dict(overrides)
        hi_child[col] = (float(np.ceil(value)), self.root_upper[col])
        bound = self.solver.objective()
        down = _Node(bound, self._next_seq(), lo_child, basis)
        up = _Node(bound, self._next_seq(), hi_child, basis)
        # Plunge toward the nearer integer first.
        if value - np.floor(value) >= 0.5:
            return up, down
        return down, up

    def _next_seq(self) -> int:
        self.seq += 1
        return self.seq

    def _out_of_budget(self) -> str | None:
        if self.options.node_limit is not None and self.nodes >= self.options.node_limit:
            return "node-limit"
        if self.deadline is not None and time.monotonic() > self.deadline:
            return "time-limit"
        return None

    # -- main loop ----------------------------------------------------------

    def run(self) -> SolveOutcome:
        opts = self.options
        status = None
        root = _Node(-np.inf, 0, {}, None)
        heapq.heappush(self.heap, root)
        first = True
        while self.heap:
            budget = self._out_of_budget()
            if budget:
                status = budget
                break
            node = heapq.heappop(self.heap)
            slack = self._prune_slack()
            if node.bound >= self.incumbent_obj - slack:
                self.discarded_min = min(self.discarded_min, node.bound)
                continue
            gap_now = self._gap_now(node.bound)
            if gap_now is not None and gap_now <= opts.rel_gap_tol and not first:
                heapq.heappush(self.heap, node)
                status = "gap-limit"
                break

            plunges = 0
            basis = node.basis
            overrides = node.overrides
            in_place = False
            while True:
                self.nodes += 1
                self._apply_overrides(overrides)
                outcome, value = self._solve_current(basis, in_place=in_place)
                if outcome == "infeasible":
                    break
                if first:
                    self._run_heuristic(
                        self.solver.values(),
                        opts.improvement_passes,
                        opts.swap_passes,
                        rounds=opts.ils_rounds,
                    )
                    first = False
                elif opts.heuristic_interval and self.nodes % opts.heuristic_interval == 0:
                    self._run_heuristic(self.solver.values(), 3, 1)
                slack = self._prune_slack()
                if value >= self.incumbent_obj - slack:
                    self.discarded_min = min(self.discarded_min, value)
                    break
                values = self.solver.values()
                col = self._fractional_column(values)
                if col is None:
                    self._offer(self.model.meta.schedule_from_values(values))
                    break
                basis_snapshot = self.solver.snapshot()
                child_now, child_later = self._branch(
                    overrides, col, values[col], basis_snapshot
                )
                heapq.heappush(self.heap, child_later)
                budget = self._out_of_budget()
                if budget or plunges >= opts.plunge_depth:
                    heapq.heappush(self.heap, child_now)
                    break
                # Continue directly into the nearer child: the solver still
                # holds this node's optimal basis, so only bounds change.
                plunges += 1
                overrides = child_now.overrides
                in_place = True

        if status is None:
            status = "optimal" if not self.heap else "gap-limit"
        bound = self._final_bound()
        wall = time.monotonic() - self.start
        if self.incumbent is None:
            outcome_status = "infeasible" if status == "optimal" else status
            return SolveOutcome(
                status=outcome_status,
                schedule=None,
                deviations=None,
                chebyshev=None,
                objective=None,
                bound=bound,
                nodes=self.nodes,
                wall_time_s=wall,
                lp_iterations=self.lp_iterations,
            )
        obj, cheb, dev = self.model.meta.objective_of(self.incumbent)
        return SolveOutcome(
            status=status,
            schedule=self.incumbent,
            deviations=dev,
            chebyshev=cheb if self.model.meta.kind == "scalarized" else None,
            objective=obj,
            bound=min(bound, obj),
            nodes=self.nodes,
            wall_time_s=wall,
            lp_iterations=self.lp_iterations,
        )

    def _gap_now(self, current_bound: float) -> float | None:
        if not np.isfinite(self.incumbent_obj):
            return None
        bound = min(
            current_bound,
            min((n.bound for n in self.heap), default=np.inf),
        )
        if not np.isfinite(bound):
            return None
        return (self.incumbent_obj - bound) / max(1.0, abs(self.incumbent_obj))

    def _final_bound(self) -> float:
        candidates = [self.discarded_min]
        candidates.extend(n.bound for n in self.heap)
        if np.isfinite(self.incumbent_obj):
            candidates.append(self.incumbent_obj)
        finite = [c for c in candidates if np.isfinite(c)]
        return min(finite) if finite else -np.inf


def _lex_less(a: np.ndarray, b: np.ndarray) -> bool:
    diff = a != b
    if not diff.any():
        return False
    first = int(np.argmax(diff))
    return a[first] < b[first]


def solve_milp(model: MilpModel, options: SolveOptions | None = None) -> SolveOutcome:
    """Solve a scheduling MILP to the requested gap with branch and bound.

    On optimal status the returned schedule is a global optimum within the
    gap tolerance; the reported deviations are recomputed exactly from the
    schedule.  Resource-limited runs carry the best incumbent and the proven
    bound instead of failing.
    """
    opts = options or SolveOptions()
    search = _Search(model, opts)
    if opts.heuristic and model.meta.kind == "single-objective" and model.meta.n_stands:
        search._offer(_subset_incumbent(model))
    return search.run()
