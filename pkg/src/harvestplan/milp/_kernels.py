"""Compiled simplex pivot loops (numba).

These kernels mirror the pure-numpy loops in :mod:`.simplex` exactly: same
pricing, same Harris ratio tests, same Bland fallback.  They exist because a
574-row scheduling relaxation spends more time in numpy dispatch than in
arithmetic; as fused loops (with BLAS matvecs for the heavy products) the
per-iteration cost drops by roughly an order of magnitude.
``simplex.SimplexSolver`` falls back to the numpy loops when numba is
unavailable, and the test suite cross-checks both paths.

Outcome codes: 0 optimal, 1 iteration limit, 2 unbounded (primal) or
infeasible (dual), 3 numerical failure.
"""

from __future__ import annotations

import numpy as np

try:  # pragma: no cover - import guard
    from numba import njit

    NUMBA_AVAILABLE = True
except Exception:  # pragma: no cover
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):  # type: ignore
        def wrap(fn):
            return fn

        return wrap


# Tolerances duplicated from .simplex (numba wants plain constants).
FEAS_TOL = 1e-9
DUAL_FEAS_EXIT = 1e-7
DUAL_TOL = 1e-9
PIVOT_TOL = 1e-9
DEGENERATE_TOL = 1e-11
BLAND_TRIGGER = 1000
REFACTOR_EVERY = 200
HARRIS_PRIMAL_SHIFT = 5e-8
HARRIS_DUAL_SHIFT = 1e-9
MIN_PIVOT = 1e-10

BASIC, AT_LOWER, AT_UPPER = 0, 1, 2


@njit(cache=True)
def _refactor_kernel(At, b, lower, upper, head, status, binv, xB):
    m = head.size
    B = np.empty((m, m))
    for i in range(m):
        col = head[i]
        for r in range(m):
            B[r, i] = At[col, r]
    binv[:, :] = np.linalg.inv(B)
    # Nonbasic columns rest at their bounds; subtract their contribution.
    n = status.size
    v = np.zeros(n)
    for j in range(n):
        st = status[j]
        if st == BASIC:
            continue
        bound = upper[j] if st == AT_UPPER else lower[j]
        if np.isfinite(bound):
            v[j] = bound
    rhs = b - v @ At
    xB[:] = binv @ rhs


@njit(cache=True)
def _refresh_dw(At_w, working, cost, head, binv, status, d_w):
    m = head.size
    cB = np.empty(m)
    for i in range(m):
        cB[i] = cost[head[i]]
    y = cB @ binv
    tmp = At_w @ y
    for k in range(working.size):
        d_w[k] = cost[working[k]] - tmp[k]
        if status[working[k]] == BASIC:
            d_w[k] = 0.0


@njit(cache=True)
def _refresh_d_full(At, cost, head, binv, status, d):
    m = head.size
    cB = np.empty(m)
    for i in range(m):
        cB[i] = cost[head[i]]
    y = cB @ binv
    tmp = At @ y
    for j in range(d.size):
        d[j] = cost[j] - tmp[j]
    for i in range(m):
        d[head[i]] = 0.0


@njit(cache=True)
def _apply_eta_kernel(binv, w, r):
    m = w.size
    piv = w[r]
    for c in range(m):
        binv[r, c] /= piv
    for i in range(m):
        if i == r:
            continue
        wi = w[i]
        if wi != 0.0:
            for c in range(m):
                binv[i, c] -= wi * binv[r, c]


@njit(cache=True)
def primal_kernel(
    At,
    b,
    lower,
    upper,
    cost,
    working,
    At_w,
    pos_of_col,
    head,
    status,
    binv,
    xB,
    d_w,
    devex_w,
    allow_unbounded,
    bland0,
    streak0,
    etas0,
    iters_done,
    iter_limit,
):
    m = head.size
    W = working.size
    bland = bland0
    streak = streak0
    etas = etas0
    iters = iters_done

    while True:
        if iters >= iter_limit:
            return 1, iters, bland, streak, etas

        # Entering choice over the working set.
        q_w = -1
        if bland:
            for k in range(W):
                col = working[k]
                if lower[col] == upper[col]:
                    continue
                st = status[col]
                if (st == AT_LOWER and d_w[k] < -DUAL_TOL) or (
                    st == AT_UPPER and d_w[k] > DUAL_TOL
                ):
                    q_w = k
                    break
        else:
            best_score = -1.0
            for k in range(W):
                col = working[k]
                if lower[col] == upper[col]:
                    continue
                st = status[col]
                dk = d_w[k]
                if (st == AT_LOWER and dk < -DUAL_TOL) or (
                    st == AT_UPPER and dk > DUAL_TOL
                ):
                    score = dk * dk / devex_w[k]
                    if score > best_score:
                        best_score = score
                        q_w = k
        if q_w < 0:
            return 0, iters, bland, streak, etas

        q = working[q_w]
        sigma = 1.0 if status[q] == AT_LOWER else -1.0

        w = binv @ At[q]

        # Harris two-pass ratio test over basics.
        theta_basic = np.inf
        theta_relaxed = np.inf
        for i in range(m):
            h = sigma * w[i]
            if h > PIVOT_TOL:
                s = xB[i] - lower[head[i]]
                if s < 0.0:
                    s = 0.0
                ratio = s / h
                if ratio < theta_basic:
                    theta_basic = ratio
                relaxed = (s + HARRIS_PRIMAL_SHIFT) / h
                if relaxed < theta_relaxed:
                    theta_relaxed = relaxed
            elif h < -PIVOT_TOL:
                s = upper[head[i]] - xB[i]
                if s < 0.0:
                    s = 0.0
                ratio = s / (-h)
                if ratio < theta_basic:
                    theta_basic = ratio
                relaxed = (s + HARRIS_PRIMAL_SHIFT) / (-h)
                if relaxed < theta_relaxed:
                    theta_relaxed = relaxed

        span = upper[q] - lower[q]
        theta_self = span if np.isfinite(span) else np.inf

        if not np.isfinite(min(theta_self, theta_basic)):
            if allow_unbounded:
                return 2, iters, bland, streak, etas
            return 3, iters, bland, streak, etas

        if theta_self <= theta_basic:
            iters += 1
            if abs(theta_self) <= DEGENERATE_TOL:
                streak += 1
                if streak >= BLAND_TRIGGER:
                    bland = True
            else:
                streak = 0
            for i in range(m):
                xB[i] -= theta_self * sigma * w[i]
            status[q] = AT_UPPER if sigma > 0 else AT_LOWER
            continue

        # Leaving row: Bland takes the smallest basic index among exact ties,
        # otherwise the largest pivot within the relaxed Harris ratio.
        r_pick = -1
        if bland:
            best_head = -1
            for i in range(m):
                h = sigma * w[i]
                if h > PIVOT_TOL:
                    s = max(xB[i] - lower[head[i]], 0.0)
                    ratio = s / h
                elif h < -PIVOT_TOL:
                    s = max(upper[head[i]] - xB[i], 0.0)
                    ratio = s / (-h)
                else:
                    continue
                if ratio <= theta_basic + DEGENERATE_TOL:
                    if best_head < 0 or head[i] < best_head:
                        best_head = head[i]
                        r_pick = i
            theta = theta_basic
        else:
            if theta_self < theta_relaxed:
                theta_relaxed = theta_self
            best_mag = -1.0
            for i in range(m):
                h = sigma * w[i]
                if h > PIVOT_TOL:
                    s = max(xB[i] - lower[head[i]], 0.0)
                    ratio = s / h
                elif h < -PIVOT_TOL:
                    s = max(upper[head[i]] - xB[i], 0.0)
                    ratio = s / (-h)
                else:
                    continue
                if ratio <= theta_relaxed and abs(h) > best_mag:
                    best_mag = abs(h)
                    r_pick = i
            theta = 0.0
            if r_pick >= 0:
                h = sigma * w[r_pick]
                if h > 0:
                    theta = max(xB[r_pick] - lower[head[r_pick]], 0.0) / h
                else:
                    theta = max(upper[head[r_pick]] - xB[r_pick], 0.0) / (-h)

        if r_pick < 0 or abs(w[r_pick]) < MIN_PIVOT:
            if etas > 0:
                _refactor_kernel(At, b, lower, upper, head, status, binv, xB)
                etas = 0
                _refresh_dw(At_w, working, cost, head, binv, status, d_w)
                continue
            return 3, iters, bland, streak, etas

        r = r_pick
        iters += 1
        if abs(theta) <= DEGENERATE_TOL:
            streak += 1
            if streak >= BLAND_TRIGGER:
                bland = True
        else:
            streak = 0

        leaving = head[r]
        leaving_status = AT_LOWER if sigma * w[r] > 0 else AT_UPPER
        entering_value = (lower[q] if sigma > 0 else upper[q]) + sigma * theta
        for i in range(m):
            xB[i] -= theta * sigma * w[i]

        # Working-set reduced costs and Devex from tableau row r (pre-eta).
        alpha_w = At_w @ binv[r]
        alpha_q = alpha_w[q_w]
        d_q = d_w[q_w]
        coef = d_q / alpha_q
        if coef != 0.0:
            for k in range(W):
                d_w[k] -= coef * alpha_w[k]
        d_w[q_w] = 0.0
        lw = pos_of_col[leaving]
        if lw >= 0:
            d_w[lw] = -coef

        gamma = devex_w[q_w] / (alpha_q * alpha_q)
        if gamma < 1e-10:
            gamma = 1e-10
        max_devex = 0.0
        for k in range(W):
            cand = alpha_w[k] * alpha_w[k] * gamma
            if cand > devex_w[k]:
                devex_w[k] = cand
            if devex_w[k] > max_devex:
                max_devex = devex_w[k]
        if lw >= 0:
            devex_w[lw] = max(gamma, 1.0)
        if max_devex > 1e8:
            for k in range(W):
                devex_w[k] = 1.0

        status[leaving] = leaving_status
        status[q] = BASIC
        xB[r] = entering_value
        head[r] = q
        _apply_eta_kernel(binv, w, r)
        etas += 1
        if etas >= REFACTOR_EVERY:
            _refactor_kernel(At, b, lower, upper, head, status, binv, xB)
            etas = 0
            _refresh_dw(At_w, working, cost, head, binv, status, d_w)


@njit(cache=True)
def dual_kernel(
    At,
    b,
    lower,
    upper,
    cost,
    head,
    status,
    binv,
    xB,
    d,
    bland0,
    streak0,
    etas0,
    iters_done,
    iter_limit,
):
    m = head.size
    n = d.size
    bland = bland0
    streak = streak0
    etas = etas0
    iters = iters_done

    while True:
        if iters >= iter_limit:
            return 1, iters, bland, streak, etas

        # Most-violated basic.  The exit threshold matches the 1e-7 row
        # guarantee; chasing violations below arithmetic noise thrashes.
        r = -1
        worst = DUAL_FEAS_EXIT
        delta = 1.0
        for i in range(m):
            below = lower[head[i]] - xB[i]
            above = xB[i] - upper[head[i]]
            if below > worst:
                worst = below
                r = i
                delta = -1.0
            if above > worst:
                worst = above
                r = i
                delta = 1.0
        if r < 0:
            return 0, iters, bland, streak, etas
        target = upper[head[r]] if delta > 0 else lower[head[r]]

        alpha = At @ binv[r]

        # Bound-flipping pass: walk eligible candidates in ratio order and
        # flip every one whose whole span is absorbed by the violation (no
        # basis change, reduced costs untouched).  Displacements accumulate
        # into one combined basic update; the leftover violation is fixed by
        # an ordinary pivot.
        ratios_all = np.full(n, np.inf)
        for j in range(n):
            if lower[j] == upper[j]:
                continue
            st = status[j]
            ab = delta * alpha[j]
            if st == AT_LOWER and ab > PIVOT_TOL:
                ratios_all[j] = max(d[j], 0.0) / ab
            elif st == AT_UPPER and ab < -PIVOT_TOL:
                ratios_all[j] = min(d[j], 0.0) / ab
        order = np.argsort(ratios_all)
        residual = abs(xB[r] - target)
        shift = np.zeros(m)
        r_shift = 0.0
        flipped = 0
        for oi in range(n):
            f = order[oi]
            if not np.isfinite(ratios_all[f]):
                break
            span_f = upper[f] - lower[f]
            if not np.isfinite(span_f):
                break
            gain = abs(alpha[f]) * span_f
            if gain >= residual - FEAS_TOL:
                break
            num = (xB[r] - r_shift) - target
            step_sign = 1.0 if num / alpha[f] > 0 else -1.0
            disp = step_sign * span_f
            for i in range(m):
                shift[i] += disp * At[f, i]
            r_shift += disp * alpha[f]
            residual -= gain
            status[f] = AT_UPPER if status[f] == AT_LOWER else AT_LOWER
            flipped += 1
        if flipped > 0:
            correction = binv @ shift
            for i in range(m):
                xB[i] -= correction[i]
        if abs(xB[r] - target) <= FEAS_TOL:
            continue

        # Entering choice with dual Harris (Bland: smallest eligible index
        # among minimal ratios).  Only candidates whose span absorbs the
        # remaining violation may pivot; smaller ones were flipped above.
        residual = abs(xB[r] - target)
        q = -1
        if bland:
            best = np.inf
            for j in range(n):
                span_j = upper[j] - lower[j]
                if span_j == 0.0:
                    continue
                st = status[j]
                ab = delta * alpha[j]
                if st == AT_LOWER and ab > PIVOT_TOL:
                    ratio = max(d[j], 0.0) / ab
                elif st == AT_UPPER and ab < -PIVOT_TOL:
                    ratio = min(d[j], 0.0) / ab
                else:
                    continue
                if np.isfinite(span_j) and abs(alpha[j]) * span_j < residual - FEAS_TOL:
                    continue
                if ratio < best - DUAL_TOL:
                    best = ratio
                    q = j
        else:
            theta_relaxed = np.inf
            for j in range(n):
                span_j = upper[j] - lower[j]
                if span_j == 0.0:
                    continue
                st = status[j]
                ab = delta * alpha[j]
                if (st == AT_LOWER and ab > PIVOT_TOL) or (
                    st == AT_UPPER and ab < -PIVOT_TOL
                ):
                    if np.isfinite(span_j) and abs(alpha[j]) * span_j < residual - FEAS_TOL:
                        continue
                    relaxed = (abs(d[j]) + HARRIS_DUAL_SHIFT) / abs(ab)
                    if relaxed < theta_relaxed:
                        theta_relaxed = relaxed
            if np.isfinite(theta_relaxed):
                best_mag = -1.0
                for j in range(n):
                    span_j = upper[j] - lower[j]
                    if span_j == 0.0:
                        continue
                    st = status[j]
                    ab = delta * alpha[j]
                    if st == AT_LOWER and ab > PIVOT_TOL:
                        ratio = max(d[j], 0.0) / ab
                    elif st == AT_UPPER and ab < -PIVOT_TOL:
                        ratio = min(d[j], 0.0) / ab
                    else:
                        continue
                    if np.isfinite(span_j) and abs(alpha[j]) * span_j < residual - FEAS_TOL:
                        continue
                    if ratio <= theta_relaxed and abs(ab) > best_mag:
                        best_mag = abs(ab)
                        q = j
        if q < 0:
            return 2, iters, bland, streak, etas

        if abs(alpha[q]) < MIN_PIVOT:
            if etas > 0:
                _refactor_kernel(At, b, lower, upper, head, status, binv, xB)
                etas = 0
                _refresh_d_full(At, cost, head, binv, status, d)
                continue
            return 2, iters, bland, streak, etas

        w = binv @ At[q]
        step = (xB[r] - target) / alpha[q]
        entering_old = lower[q] if status[q] == AT_LOWER else upper[q]

        iters += 1
        if abs(step) <= DEGENERATE_TOL:
            streak += 1
            if streak >= BLAND_TRIGGER:
                bland = True
        else:
            streak = 0

        leaving = head[r]
        coef = d[q] / alpha[q]
        if coef != 0.0:
            for j in range(n):
                d[j] -= coef * alpha[j]
        d[q] = 0.0
        d[leaving] = -coef

        for i in range(m):
            xB[i] -= step * w[i]
        status[leaving] = AT_UPPER if delta > 0 else AT_LOWER
        status[q] = BASIC
        xB[r] = entering_old + step
        head[r] = q
        _apply_eta_kernel(binv, w, r)
        etas += 1
        if etas >= REFACTOR_EVERY:
            _refactor_kernel(At, b, lower, upper, head, status, binv, xB)
            etas = 0
            _refresh_d_full(At, cost, head, binv, status, d)
