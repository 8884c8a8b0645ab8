"""Bounded-variable revised simplex with a dual variant for warm restarts.

The solver keeps an explicit dense basis inverse with product-form updates
and periodic refactorization.  Pricing is Devex over incrementally maintained
reduced costs; anti-cycling follows the classic recipe of switching to
Bland's rule for good once a run of 1000 degenerate pivots is observed, and
the ratio tests are Harris two-pass variants so pivots stay numerically
large.  Wide models (many more columns than rows) are solved by sifting:
optimize over a working column subset, re-price the full set, pull in
violators, repeat.

Models are standardized as ``min c.v  s.t.  A v = b,  l <= v <= u`` by adding
one slack per row with sense-dependent bounds (so the all-slack basis is the
identity), plus artificial columns only where the slack basis is infeasible.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .build import GE, LE, MilpModel

BASIC, AT_LOWER, AT_UPPER = 0, 1, 2

#: Compiled pivot loops are used when numba is importable; set the
#: HARVESTPLAN_NO_JIT environment variable to force the numpy loops.
USE_JIT = _kernels.NUMBA_AVAILABLE and not os.environ.get("HARVESTPLAN_NO_JIT")

FEAS_TOL = 1e-9
DUAL_FEAS_EXIT = 1e-7
DUAL_TOL = 1e-9
PIVOT_TOL = 1e-9
DEGENERATE_TOL = 1e-11
BLAND_TRIGGER = 1000
REFACTOR_EVERY = 200
#: Harris two-pass ratio-test relaxations: accept bound (resp. dual) drift up
#: to these amounts in exchange for numerically safe pivot magnitudes.
HARRIS_PRIMAL_SHIFT = 5e-8
HARRIS_DUAL_SHIFT = 1e-9
MIN_PIVOT = 1e-10
#: Sifting kicks in above this column/row ratio; violator batch per round.
SIFT_RATIO = 3.0
SIFT_BATCH = 600

#: Row-residual tolerance guaranteed on returned solutions.
ROW_TOL = 1e-7


class Infeasible(Exception):
    """The constraint system admits no solution within the variable bounds."""


class Unbounded(Exception):
    """The objective can be driven to -inf (cannot occur for well-formed
    scheduling models, whose objectives are bounded below; raised defensively)."""


class IterationLimit(Exception):
    """Pivot budget exhausted before reaching optimality."""


@dataclass
class BasisSnapshot:
    head: np.ndarray  # (m,) int32 basic column per row
    status: np.ndarray  # (n_total,) int8

    def copy(self) -> "BasisSnapshot":
        return BasisSnapshot(self.head.copy(), self.status.copy())


@dataclass
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded" | "iteration-limit"
    values: np.ndarray | None  # structural variable values
    objective: float | None  # includes the model's objective constant
    iterations: int
    basis: BasisSnapshot | None


class StandardForm:
    """Equality standard form of a :class:`MilpModel` with slack columns."""

    def __init__(self, model: MilpModel):
        m, n = model.n_rows, model.n_vars
        self.model = model
        self.n_structural = n
        self.m = m
        cols = np.zeros((m, m))
        np.fill_diagonal(cols, 1.0)
        # At is (n_total, m) C-contiguous: column fetch and pricing are both
        # contiguous matvec work.
        self.At = np.ascontiguousarray(
            np.concatenate([model.rows, cols], axis=1).T
        )
        self.b = model.rhs.astype(float).copy()
        self.c = np.concatenate([model.objective, np.zeros(m)])
        self.c0 = float(model.objective_constant)
        slack_lower = np.where(model.senses == GE, -np.inf, 0.0)
        slack_upper = np.where(model.senses == LE, np.inf, 0.0)
        self.lower = np.concatenate([model.lower.astype(float), slack_lower])
        self.upper = np.concatenate([model.upper.astype(float), slack_upper])
        if np.any(~np.isfinite(model.lower) & ~np.isfinite(model.upper)):
            raise ValueError("free variables are not supported; bound at least one side")
        self.n_artificial = 0

    @property
    def n_total(self) -> int:
        return self.At.shape[0]

    def add_artificials(self, rows: np.ndarray, signs: np.ndarray) -> np.ndarray:
        """Append one artificial column (+-e_row) per entry; returns column ids."""
        k = rows.size
        cols = np.zeros((k, self.m))
        cols[np.arange(k), rows] = signs
        first = self.n_total
        self.At = np.ascontiguousarray(np.concatenate([self.At, cols], axis=0))
        self.c = np.concatenate([self.c, np.zeros(k)])
        self.lower = np.concatenate([self.lower, np.zeros(k)])
        self.upper = np.concatenate([self.upper, np.full(k, np.inf)])
        self.n_artificial += k
        return np.arange(first, first + k)


class SimplexSolver:
    """Primal/dual simplex over a shared :class:`StandardForm`.

    The standard form's bound arrays may be tightened between calls (branch
    and bound does exactly that); every solve re-reads them.
    """

    def __init__(self, sf: StandardForm, iteration_limit: int = 200_000):
        self.sf = sf
        self.iteration_limit = iteration_limit
        self.head: np.ndarray | None = None
        self.status: np.ndarray | None = None
        self.binv: np.ndarray | None = None
        self.xB: np.ndarray | None = None
        self.iterations = 0
        self._cost: np.ndarray | None = None  # cost vector behind self._d
        self._d: np.ndarray | None = None  # maintained reduced costs
        self._degenerate_streak = 0
        self._bland = False
        self._etas_since_refactor = 0
        self._eta_buf: np.ndarray | None = None  # (m, m) scratch

    # -- basis plumbing ----------------------------------------------------

    def _nonbasic_values(self) -> np.ndarray:
        """Full-length vector with nonbasic columns at their bound, basics 0."""
        sf = self.sf
        v = np.where(self.status == AT_UPPER, sf.upper, sf.lower)
        v[self.status == BASIC] = 0.0
        # Slack columns with only one finite bound rest there; nothing is free.
        v[~np.isfinite(v)] = 0.0
        return v

    def _refactor(self) -> None:
        sf = self.sf
        basis_matrix = sf.At[self.head].T  # (m, m)
        try:
            self.binv = np.linalg.inv(basis_matrix)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - defensive
            raise Infeasible(f"singular basis: {exc}") from exc
        xn = self._nonbasic_values()
        self.xB = self.binv @ (sf.b - xn @ sf.At)
        self._etas_since_refactor = 0
        if self._cost is not None:
            self._refresh_reduced_costs()

    def _refresh_reduced_costs(self) -> None:
        y = self._cost[self.head] @ self.binv
        self._d = self._cost - self.sf.At @ y
        self._d[self.head] = 0.0

    def _set_costs(self, c: np.ndarray) -> None:
        self._cost = c
        self._refresh_reduced_costs()

    def set_basis(self, snapshot: BasisSnapshot) -> None:
        self.head = snapshot.head.astype(np.int64).copy()
        self.status = snapshot.status.copy()
        self._cost = None
        self._refactor()

    def snapshot(self) -> BasisSnapshot:
        return BasisSnapshot(self.head.astype(np.int32).copy(), self.status.copy())

    def _slack_basis(self) -> None:
        sf = self.sf
        self.head = np.arange(sf.n_structural, sf.n_structural + sf.m, dtype=np.int64)
        self.status = np.full(sf.n_total, AT_LOWER, dtype=np.int8)
        upper_only = ~np.isfinite(sf.lower) & np.isfinite(sf.upper)
        self.status[upper_only] = AT_UPPER
        self.status[self.head] = BASIC
        self._cost = None
        self._refactor()

    def _apply_eta(self, w: np.ndarray, r: int) -> None:
        binv = self.binv
        binv[r] /= w[r]
        rest = w.copy()
        rest[r] = 0.0
        if self._eta_buf is None or self._eta_buf.shape != binv.shape:
            self._eta_buf = np.empty_like(binv)
        np.multiply(rest[:, None], binv[r][None, :], out=self._eta_buf)
        np.subtract(binv, self._eta_buf, out=binv)
        self._etas_since_refactor += 1

    def _maybe_refactor(self) -> None:
        if self._etas_since_refactor >= REFACTOR_EVERY:
            self._refactor()

    def _mark_step(self, step: float) -> None:
        if abs(step) <= DEGENERATE_TOL:
            self._degenerate_streak += 1
            if self._degenerate_streak >= BLAND_TRIGGER:
                self._bland = True
        else:
            self._degenerate_streak = 0

    # -- primal ------------------------------------------------------------

    def _primal(self, allow_unbounded: bool, working: np.ndarray | None = None) -> str:
        """Primal iterations over the working column subset (or all columns).

        Maintains reduced costs and Devex weights compactly over the subset;
        the global reduced-cost vector is refreshed by the caller afterwards.
        """
        sf = self.sf
        if working is None:
            working = np.arange(sf.n_total)
        if USE_JIT:
            return self._primal_jit(allow_unbounded, working)
        At_w = sf.At if working.size == sf.n_total else np.ascontiguousarray(
            sf.At[working]
        )
        lower_w = sf.lower[working]
        upper_w = sf.upper[working]
        fixed_w = lower_w == upper_w
        d_w = self._d[working].copy()
        devex_w = np.ones(working.size)
        pos_w = {int(col): i for i, col in enumerate(working)}

        while True:
            if self.iterations >= self.iteration_limit:
                return "iteration-limit"
            status_w = self.status[working]
            eligible = (
                ((status_w == AT_LOWER) & (d_w < -DUAL_TOL))
                | ((status_w == AT_UPPER) & (d_w > DUAL_TOL))
            ) & ~fixed_w
            if not eligible.any():
                self._d[working] = d_w
                return "optimal"
            if self._bland:
                qw = int(np.nonzero(eligible)[0][0])
            else:
                score = np.where(eligible, d_w * d_w / devex_w, -1.0)
                qw = int(np.argmax(score))
            q = int(working[qw])
            sigma = 1.0 if self.status[q] == AT_LOWER else -1.0

            w = self.binv @ sf.At[q]
            h = sigma * w
            lB = sf.lower[self.head]
            uB = sf.upper[self.head]

            moving = np.abs(h) > PIVOT_TOL
            slack = np.where(h > 0, self.xB - lB, uB - self.xB)
            np.maximum(slack, 0.0, out=slack)
            true_ratio = np.full(sf.m, np.inf)
            true_ratio[moving] = slack[moving] / np.abs(h[moving])

            span = sf.upper[q] - sf.lower[q]
            theta_self = span if np.isfinite(span) else np.inf
            theta_basic = float(true_ratio.min()) if sf.m else np.inf

            if not np.isfinite(min(theta_self, theta_basic)):
                if allow_unbounded:
                    self._d[working] = d_w
                    return "unbounded"
                raise Infeasible("phase-1 subproblem unbounded; numerical failure")

            if theta_self <= theta_basic:
                # Bound flip: basis and reduced costs stay put.
                self.iterations += 1
                self._mark_step(theta_self)
                self.xB -= theta_self * h
                self.status[q] = AT_UPPER if sigma > 0 else AT_LOWER
                continue

            if self._bland:
                candidates = np.nonzero(true_ratio <= theta_basic + DEGENERATE_TOL)[0]
                r = int(candidates[np.argmin(self.head[candidates])])
                theta = theta_basic
            else:
                relaxed = np.full(sf.m, np.inf)
                relaxed[moving] = (slack[moving] + HARRIS_PRIMAL_SHIFT) / np.abs(
                    h[moving]
                )
                theta_relaxed = min(float(relaxed.min()), theta_self)
                candidates = np.nonzero(moving & (true_ratio <= theta_relaxed))[0]
                r = int(candidates[np.argmax(np.abs(h[candidates]))])
                theta = max(float(true_ratio[r]), 0.0)

            if abs(h[r]) < MIN_PIVOT:
                if self._etas_since_refactor:
                    self._refactor()
                    self._d[working] = d_w
                    d_w = self._d[working].copy()
                    continue
                raise Infeasible("numerical failure: no acceptable pivot")

            self.iterations += 1
            self._mark_step(theta)
            leaving = int(self.head[r])
            leaving_status = AT_LOWER if h[r] > 0 else AT_UPPER
            entering_value = (sf.lower[q] if sigma > 0 else sf.upper[q]) + sigma * theta
            self.xB -= theta * h

            # Working-set reduced-cost and Devex updates from tableau row r.
            rho = self.binv[r].copy()
            alpha_w = At_w @ rho
            alpha_q = alpha_w[qw]
            d_q = d_w[qw]
            coef = d_q / alpha_q
            if coef != 0.0:
                d_w -= coef * alpha_w
            d_w[qw] = 0.0
            lw = pos_w.get(leaving)
            if lw is not None:
                d_w[lw] = -coef

            gamma = max(devex_w[qw] / (alpha_q * alpha_q), 1e-10)
            np.maximum(devex_w, (alpha_w * alpha_w) * gamma, out=devex_w)
            if lw is not None:
                devex_w[lw] = max(gamma, 1.0)
            if devex_w.max() > 1e8:
                devex_w[:] = 1.0

            self.status[leaving] = leaving_status
            self.status[q] = BASIC
            self.xB[r] = entering_value
            self.head[r] = q
            self._apply_eta(w, r)
            if self._etas_since_refactor >= REFACTOR_EVERY:
                self._d[working] = d_w
                self._refactor()
                d_w = self._d[working].copy()

    def _primal_jit(self, allow_unbounded: bool, working: np.ndarray) -> str:
        """Compiled-primal dispatch; state round-trips through the kernel."""
        sf = self.sf
        working = np.ascontiguousarray(working, dtype=np.int64)
        At_w = sf.At if working.size == sf.n_total else np.ascontiguousarray(
            sf.At[working]
        )
        pos_of_col = np.full(sf.n_total, -1, dtype=np.int64)
        pos_of_col[working] = np.arange(working.size)
        d_w = np.ascontiguousarray(self._d[working])
        devex_w = np.ones(working.size)
        code, iters, bland, streak, etas = _kernels.primal_kernel(
            sf.At,
            sf.b,
            sf.lower,
            sf.upper,
            self._cost,
            working,
            At_w,
            pos_of_col,
            self.head,
            self.status,
            self.binv,
            self.xB,
            d_w,
            devex_w,
            allow_unbounded,
            self._bland,
            self._degenerate_streak,
            self._etas_since_refactor,
            self.iterations,
            self.iteration_limit,
        )
        self.iterations = int(iters)
        self._bland = bool(bland)
        self._degenerate_streak = int(streak)
        self._etas_since_refactor = int(etas)
        self._d[working] = d_w
        if code == 0:
            return "optimal"
        if code == 1:
            return "iteration-limit"
        if code == 2:
            return "unbounded"
        raise Infeasible("numerical failure in compiled primal loop")

    def _primal_optimize(self, allow_unbounded: bool) -> str:
        """Drive :meth:`_primal`, sifting over column subsets on wide models."""
        sf = self.sf
        if sf.n_total <= SIFT_RATIO * sf.m + SIFT_BATCH:
            outcome = self._primal(allow_unbounded)
            if outcome == "optimal":
                self._refresh_reduced_costs()
            return outcome
        always = np.nonzero(~self.sf.model.is_integer)[0]
        always = np.concatenate(
            [always, np.arange(sf.n_structural, sf.n_total)]
        )  # continuous + slacks + artificials
        while True:
            violation = np.where(
                self.status == AT_LOWER, -self._d, 0.0
            ) + np.where(self.status == AT_UPPER, self._d, 0.0)
            violation[self.head] = 0.0
            keep = np.zeros(sf.n_total, dtype=bool)
            keep[always] = True
            keep[self.head] = True
            keep[self.status == AT_UPPER] = True
            violators = np.argsort(-violation, kind="stable")[:SIFT_BATCH]
            keep[violators[violation[violators] > DUAL_TOL]] = True
            working = np.nonzero(keep)[0]
            outcome = self._primal(allow_unbounded, working)
            if outcome != "optimal":
                return outcome
            self._refresh_reduced_costs()
            violation = np.where(
                self.status == AT_LOWER, -self._d, 0.0
            ) + np.where(self.status == AT_UPPER, self._d, 0.0)
            violation[self.head] = 0.0
            fixed = sf.lower == sf.upper
            violation[fixed] = 0.0
            if violation.max() <= DUAL_TOL:
                return "optimal"

    # -- dual --------------------------------------------------------------

    def _dual(self) -> str:
        """Restore primal feasibility while keeping dual feasibility.

        Requires the current basis to be dual feasible for the active costs.
        Returns "optimal" once all basics are within bounds, or "infeasible"
        when a violated row cannot be repaired.
        """
        if USE_JIT:
            return self._dual_jit()
        sf = self.sf
        fixed = sf.lower == sf.upper
        budget = min(self.iteration_limit, self.iterations + sf.m // 2 + 200)
        while True:
            if self.iterations >= budget:
                return "iteration-limit"
            lB = sf.lower[self.head]
            uB = sf.upper[self.head]
            below = lB - self.xB
            above = self.xB - uB
            viol = np.maximum(below, above)
            r = int(np.argmax(viol))
            # Exit threshold matches the 1e-7 row guarantee; chasing
            # violations below arithmetic noise thrashes.
            if viol[r] <= DUAL_FEAS_EXIT:
                return "optimal"
            delta = 1.0 if above[r] > below[r] else -1.0
            target = uB[r] if delta > 0 else lB[r]

            rho = self.binv[r]
            alpha = sf.At @ rho
            d = self._d
            status = self.status

            # Bound-flipping pass: walk eligible candidates in ratio order
            # and flip every one whose whole span is absorbed by the
            # violation (no basis change, reduced costs untouched); the
            # displacements accumulate into one combined basic update.
            abar = delta * alpha
            elig_low = (status == AT_LOWER) & ~fixed & (abar > PIVOT_TOL)
            elig_up = (status == AT_UPPER) & ~fixed & (abar < -PIVOT_TOL)
            ratios_f = np.full(sf.n_total, np.inf)
            ratios_f[elig_low] = np.maximum(d[elig_low], 0.0) / abar[elig_low]
            ratios_f[elig_up] = np.minimum(d[elig_up], 0.0) / abar[elig_up]
            residual = abs(self.xB[r] - target)
            shift = np.zeros(sf.m)
            r_shift = 0.0
            flipped = 0
            for f in np.argsort(ratios_f):
                if not np.isfinite(ratios_f[f]):
                    break
                span = sf.upper[f] - sf.lower[f]
                if not np.isfinite(span):
                    break
                gain = abs(alpha[f]) * span
                if gain >= residual - FEAS_TOL:
                    break
                num = (self.xB[r] - r_shift) - target
                step_sign = 1.0 if num / alpha[f] > 0 else -1.0
                disp = step_sign * span
                shift += disp * sf.At[f]
                r_shift += disp * alpha[f]
                residual -= gain
                status[f] = AT_UPPER if status[f] == AT_LOWER else AT_LOWER
                flipped += 1
            if flipped:
                self.xB -= self.binv @ shift
            if abs(self.xB[r] - target) <= FEAS_TOL:
                continue

            abar = delta * alpha
            residual = abs(self.xB[r] - target)
            spans = sf.upper - sf.lower
            with np.errstate(invalid="ignore"):
                absorbs = np.abs(alpha) * spans >= residual - FEAS_TOL
            absorbs |= ~np.isfinite(spans) & (np.abs(alpha) > PIVOT_TOL)
            elig_low = (status == AT_LOWER) & ~fixed & (abar > PIVOT_TOL) & absorbs
            elig_up = (status == AT_UPPER) & ~fixed & (abar < -PIVOT_TOL) & absorbs
            eligible = elig_low | elig_up
            if not eligible.any():
                return "infeasible"
            # Dual feasibility gives d >= 0 at lower bounds and d <= 0 at
            # upper bounds; the clamps only absorb rounding noise.
            ratios = np.full(sf.n_total, np.inf)
            ratios[elig_low] = np.maximum(d[elig_low], 0.0) / abar[elig_low]
            ratios[elig_up] = np.minimum(d[elig_up], 0.0) / abar[elig_up]
            if self._bland:
                best = float(ratios.min())
                candidates = np.nonzero((ratios <= best + DUAL_TOL) & eligible)[0]
                q = int(candidates[0])
            else:
                relaxed = np.full(sf.n_total, np.inf)
                relaxed[eligible] = (
                    np.abs(d[eligible]) + HARRIS_DUAL_SHIFT
                ) / np.abs(abar[eligible])
                theta_relaxed = float(relaxed.min())
                candidates = np.nonzero(eligible & (ratios <= theta_relaxed))[0]
                q = int(candidates[np.argmax(np.abs(abar[candidates]))])

            if abs(alpha[q]) < MIN_PIVOT:
                if self._etas_since_refactor:
                    self._refactor()
                    continue
                return "infeasible"

            w = self.binv @ sf.At[q]
            step = (self.xB[r] - target) / alpha[q]
            entering_old = sf.lower[q] if status[q] == AT_LOWER else sf.upper[q]

            self.iterations += 1
            self._mark_step(step)

            leaving = int(self.head[r])
            coef = d[q] / alpha[q]
            if coef != 0.0:
                d -= coef * alpha
            d[q] = 0.0
            d[leaving] = -coef

            self.xB -= step * w
            self.status[leaving] = AT_UPPER if delta > 0 else AT_LOWER
            self.status[q] = BASIC
            self.xB[r] = entering_old + step
            self.head[r] = q
            self._apply_eta(w, r)
            self._maybe_refactor()

    def _dual_jit(self) -> str:
        budget = min(self.iteration_limit, self.iterations + self.sf.m // 2 + 200)
        code, iters, bland, streak, etas = _kernels.dual_kernel(
            self.sf.At,
            self.sf.b,
            self.sf.lower,
            self.sf.upper,
            self._cost,
            self.head,
            self.status,
            self.binv,
            self.xB,
            self._d,
            self._bland,
            self._degenerate_streak,
            self._etas_since_refactor,
            self.iterations,
            budget,
        )
        self.iterations = int(iters)
        self._bland = bool(bland)
        self._degenerate_streak = int(streak)
        self._etas_since_refactor = int(etas)
        if code == 0:
            return "optimal"
        if code == 1:
            return "iteration-limit"
        return "infeasible"

    # -- drivers -----------------------------------------------------------

    def _phase_one(self) -> str:
        sf = self.sf
        self._slack_basis()
        lB = sf.lower[self.head]
        uB = sf.upper[self.head]
        bad = (self.xB < lB - FEAS_TOL) | (self.xB > uB + FEAS_TOL)
        if bad.any():
            rows = np.nonzero(bad)[0]
            resid = self.xB[rows] - np.clip(self.xB[rows], lB[rows], uB[rows])
            signs = np.sign(resid)
            art_cols = sf.add_artificials(rows, signs)
            self.status = np.concatenate(
                [self.status, np.full(art_cols.size, AT_LOWER, dtype=np.int8)]
            )
            # The violated slack moves to its nearest bound; the artificial
            # absorbs the residual.
            for row, col in zip(rows, art_cols):
                slack = int(self.head[row])
                self.status[slack] = (
                    AT_UPPER
                    if np.isfinite(sf.upper[slack]) and self.xB[row] > sf.upper[slack]
                    else AT_LOWER
                )
                self.head[row] = col
                self.status[col] = BASIC
            self._refactor()
            c1 = np.zeros(sf.n_total)
            c1[art_cols] = 1.0
            self._set_costs(c1)
            outcome = self._primal_optimize(allow_unbounded=False)
            if outcome != "optimal":
                return outcome
            if self.xB[np.isin(self.head, art_cols)].sum() > 1e-7:
                return "infeasible"
            # Freeze artificials at zero for phase 2.
            sf.upper[art_cols] = 0.0
        return "optimal"

    def solve_from_scratch(self) -> str:
        outcome = self._phase_one()
        if outcome != "optimal":
            return outcome
        self._set_costs(self._padded_cost())
        return self._primal_optimize(allow_unbounded=True)

    def solve_warm(self, snapshot: BasisSnapshot) -> str:
        """Re-optimize after bound changes, starting from a dual-feasible basis."""
        sf = self.sf
        status = snapshot.status
        if status.size != sf.n_total:
            # Artificials were added after the snapshot was taken: pad.
            pad = np.full(sf.n_total - status.size, AT_LOWER, dtype=np.int8)
            snapshot = BasisSnapshot(snapshot.head, np.concatenate([status, pad]))
        self.set_basis(snapshot)
        self._set_costs(self._padded_cost())
        return self._dual_then_primal()

    def reoptimize_in_place(self) -> str:
        """Re-optimize with the solver's current basis after a bound change.

        Skips refactorization: the basis matrix is unchanged, only nonbasic
        values (and hence basic values) moved with the bounds.
        """
        xn = self._nonbasic_values()
        self.xB = self.binv @ (self.sf.b - xn @ self.sf.At)
        return self._dual_then_primal()

    def _dual_then_primal(self) -> str:
        outcome = self._dual()
        if outcome == "optimal":
            outcome = self._primal_optimize(allow_unbounded=True)
        return outcome

    def solve_with_basis_hint(self, pairs: list[tuple[int, int]]) -> str:
        """Start from a (row, column) crash assignment; falls back if infeasible."""
        sf = self.sf
        head = np.arange(sf.n_structural, sf.n_structural + sf.m, dtype=np.int64)
        for row, col in pairs:
            head[row] = col
        status = np.full(sf.n_total, AT_LOWER, dtype=np.int8)
        upper_only = ~np.isfinite(sf.lower) & np.isfinite(sf.upper)
        status[upper_only] = AT_UPPER
        status[head] = BASIC
        self.head = head
        self.status = status
        self._cost = None
        try:
            self._refactor()
        except Infeasible:
            return self.solve_from_scratch()
        lB = sf.lower[self.head]
        uB = sf.upper[self.head]
        if ((self.xB < lB - FEAS_TOL) | (self.xB > uB + FEAS_TOL)).any():
            return self.solve_from_scratch()
        self._set_costs(self._padded_cost())
        return self._primal_optimize(allow_unbounded=True)

    def _padded_cost(self) -> np.ndarray:
        c = self.sf.c
        if c.size != self.sf.n_total:
            c = np.concatenate([c, np.zeros(self.sf.n_total - c.size)])
            self.sf.c = c
        return c

    # -- extraction ----------------------------------------------------------

    def values(self) -> np.ndarray:
        full = self._nonbasic_values()
        full[self.head] = self.xB
        return full[: self.sf.n_structural]

    def objective(self) -> float:
        full = self._nonbasic_values()
        full[self.head] = self.xB
        return float(self.sf.c @ full) + self.sf.c0

    def max_row_residual(self) -> float:
        full = self._nonbasic_values()
        full[self.head] = self.xB
        resid = full @ self.sf.At - self.sf.b
        return float(np.abs(resid).max()) if resid.size else 0.0


def solve_lp_relaxation(
    model: MilpModel,
    iteration_limit: int = 200_000,
    use_crash_basis: bool = True,
) -> LpSolution:
    """Solve the LP relaxation (integrality dropped to the variable bounds).

    Returns an optimal basic solution satisfying every row within 1e-7, or
    raises :class:`Infeasible` / :class:`Unbounded` / :class:`IterationLimit`.
    """
    sf = StandardForm(model)
    solver = SimplexSolver(sf, iteration_limit=iteration_limit)
    if use_crash_basis and model.meta.crash_basis:
        outcome = solver.solve_with_basis_hint(model.meta.crash_basis)
    else:
        outcome = solver.solve_from_scratch()
    if outcome == "infeasible":
        raise Infeasible("LP relaxation infeasible")
    if outcome == "unbounded":
        raise Unbounded("LP relaxation unbounded")
    if outcome == "iteration-limit":
        raise IterationLimit(f"no optimum within {iteration_limit} pivots")
    if solver.max_row_residual() > ROW_TOL:
        solver._refactor()
        if solver.max_row_residual() > ROW_TOL:  # pragma: no cover - defensive
            raise Infeasible("numerical failure: row residual above tolerance")
    return LpSolution(
        status="optimal",
        values=solver.values(),
        objective=solver.objective(),
        iterations=solver.iterations,
        basis=solver.snapshot(),
    )
