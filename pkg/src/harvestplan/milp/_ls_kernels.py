"""Compiled local search over harvest schedules (numba).

Moves are single-stand reassignments (including unharvesting) and pairwise
period swaps, evaluated incrementally against the scalarized objective.  The
iterated variant escapes local optima by perturbing a few stands with a
seeded xorshift generator and re-descending, keeping the best schedule seen.
Everything is deterministic in (inputs, seed, round counts).

The pure-python fallback lives in :mod:`.bnb` and the test suite checks the
two paths against each other.
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


@njit(cache=True, inline="always")
def _xorshift(state: np.uint64) -> np.uint64:
    state ^= state << np.uint64(13)
    state ^= state >> np.uint64(7)
    state ^= state << np.uint64(17)
    return state


@njit(cache=True)
def _score(gaps, epsilon):
    worst = 0.0
    total = 0.0
    flat = gaps.ravel()
    for i in range(flat.size):
        g = flat[i]
        total += g
        if g > worst:
            worst = g
    return worst + epsilon * total


@njit(cache=True)
def _gaps_from_prod(prod, demand, weights, aspirations, out):
    n_a, n_t, s = prod.shape
    for a in range(n_a):
        for t in range(n_t):
            dem = demand[a, t]
            for p in range(s):
                dev = prod[a, t, p] - dem
                if dev < 0.0:
                    dev = -dev
                out[a, t, p] = weights[a, t, p] * (dev - aspirations[a, t, p])


@njit(cache=True)
def _candidate_score(
    prod, gaps, vol, demand, weights, aspirations, epsilon, stand, t_old, t_new
):
    """Objective after moving one stand, without applying the move."""
    n_a, n_t, s = prod.shape
    worst = 0.0
    total = 0.0
    for a in range(n_a):
        for t in range(n_t):
            affected = (t + 1 == t_old) or (t + 1 == t_new)
            for p in range(s):
                if affected:
                    value = prod[a, t, p]
                    if t + 1 == t_old:
                        value -= vol[a, p, stand]
                    if t + 1 == t_new:
                        value += vol[a, p, stand]
                    dev = value - demand[a, t]
                    if dev < 0.0:
                        dev = -dev
                    g = weights[a, t, p] * (dev - aspirations[a, t, p])
                else:
                    g = gaps[a, t, p]
                total += g
                if g > worst:
                    worst = g
    if worst < 0.0:
        worst = 0.0
    return worst + epsilon * total


@njit(cache=True)
def _apply_move(prod, vol, stand, t_old, t_new):
    n_a, s = vol.shape[0], vol.shape[1]
    for a in range(n_a):
        for p in range(s):
            v = vol[a, p, stand]
            if t_old > 0:
                prod[a, t_old - 1, p] -= v
            if t_new > 0:
                prod[a, t_new - 1, p] += v


@njit(cache=True)
def _swap_score(
    prod, gaps, vol, demand, weights, aspirations, epsilon, j1, t1, j2, t2
):
    n_a, n_t, s = prod.shape
    worst = 0.0
    total = 0.0
    for a in range(n_a):
        for t in range(n_t):
            affected = (t + 1 == t1) or (t + 1 == t2)
            for p in range(s):
                if affected:
                    value = prod[a, t, p]
                    if t + 1 == t1:
                        value += vol[a, p, j2] - vol[a, p, j1]
                    if t + 1 == t2:
                        value += vol[a, p, j1] - vol[a, p, j2]
                    dev = value - demand[a, t]
                    if dev < 0.0:
                        dev = -dev
                    g = weights[a, t, p] * (dev - aspirations[a, t, p])
                else:
                    g = gaps[a, t, p]
                total += g
                if g > worst:
                    worst = g
    if worst < 0.0:
        worst = 0.0
    return worst + epsilon * total


@njit(cache=True)
def _descend(
    assignment,
    prod,
    gaps,
    vol,
    demand,
    weights,
    aspirations,
    epsilon,
    move_passes,
    swap_passes,
):
    """First-improvement descent; returns the (locally optimal) objective."""
    n_s = assignment.size
    n_t = demand.shape[1]
    _gaps_from_prod(prod, demand, weights, aspirations, gaps)
    current = _score(gaps, epsilon)
    for _ in range(move_passes):
        improved = False
        for j in range(n_s):
            old = assignment[j]
            best_t = -1
            best_val = current
            for t_new in range(n_t + 1):
                if t_new == old:
                    continue
                val = _candidate_score(
                    prod, gaps, vol, demand, weights, aspirations, epsilon, j, old, t_new
                )
                if val < best_val - 1e-12:
                    best_val = val
                    best_t = t_new
            if best_t >= 0:
                _apply_move(prod, vol, j, old, best_t)
                assignment[j] = best_t
                _gaps_from_prod(prod, demand, weights, aspirations, gaps)
                current = best_val
                improved = True
        if not improved:
            break
    if n_t > 1:
        for _ in range(swap_passes):
            improved = False
            for j1 in range(n_s):
                t1 = assignment[j1]
                for j2 in range(j1 + 1, n_s):
                    t2 = assignment[j2]
                    if t1 == t2:
                        continue
                    val = _swap_score(
                        prod, gaps, vol, demand, weights, aspirations, epsilon,
                        j1, t1, j2, t2,
                    )
                    if val < current - 1e-12:
                        _apply_move(prod, vol, j1, t1, t2)
                        _apply_move(prod, vol, j2, t2, t1)
                        assignment[j1] = t2
                        assignment[j2] = t1
                        _gaps_from_prod(prod, demand, weights, aspirations, gaps)
                        current = val
                        improved = True
                        t1 = assignment[j1]
            if not improved:
                break
    return current


@njit(cache=True)
def pocket_exact(
    assignment,
    free,
    vol,
    demand,
    weights,
    aspirations,
    epsilon,
):
    """Exactly optimize the assignment of a few freed stands by enumeration.

    Walks all (n_T + 1)^len(free) placements with an odometer that changes
    one digit at a time, so each step is one incremental volume move plus a
    gap rescan.  Updates ``assignment`` in place; returns the objective.
    """
    n_a = vol.shape[0]
    s = vol.shape[1]
    n_t = demand.shape[1]
    n_free = free.size
    prod = np.zeros((n_a, n_t, s))
    gaps = np.zeros((n_a, n_t, s))
    for j in range(assignment.size):
        if assignment[j] > 0:
            _apply_move(prod, vol, j, 0, assignment[j])
    # Park the free stands at "unharvested" to start the odometer at zero.
    for i in range(n_free):
        j = free[i]
        if assignment[j] > 0:
            _apply_move(prod, vol, j, assignment[j], 0)

    digits = np.zeros(n_free, dtype=np.int64)
    best_digits = np.zeros(n_free, dtype=np.int64)
    _gaps_from_prod(prod, demand, weights, aspirations, gaps)
    best = _score(gaps, epsilon)

    total = 1
    for _ in range(n_free):
        total *= n_t + 1
    for _step in range(total - 1):
        # Advance the odometer: increment digit 0, carrying as needed.
        level = 0
        while True:
            j = free[level]
            old = digits[level]
            new = old + 1
            if new > n_t:
                _apply_move(prod, vol, j, old, 0)
                digits[level] = 0
                level += 1
            else:
                _apply_move(prod, vol, j, old, new)
                digits[level] = new
                break
        _gaps_from_prod(prod, demand, weights, aspirations, gaps)
        value = _score(gaps, epsilon)
        if value < best - 1e-12:
            best = value
            for i in range(n_free):
                best_digits[i] = digits[i]
    for i in range(n_free):
        assignment[free[i]] = best_digits[i]
    return best


@njit(cache=True)
def iterated_search(
    assignment,
    vol,
    demand,
    weights,
    aspirations,
    epsilon,
    move_passes,
    swap_passes,
    rounds,
    kick_size,
    seed,
):
    """Iterated local search: descend, perturb, keep the best ever seen.

    ``assignment`` is updated in place to the best schedule; the best
    objective is returned.
    """
    n_s = assignment.size
    n_a, s, _ = vol.shape
    n_t = demand.shape[1]
    prod = np.zeros((n_a, n_t, s))
    gaps = np.zeros((n_a, n_t, s))
    for j in range(n_s):
        if assignment[j] > 0:
            _apply_move(prod, vol, j, 0, assignment[j])

    best = _descend(
        assignment, prod, gaps, vol, demand, weights, aspirations, epsilon,
        move_passes, swap_passes,
    )
    best_assignment = assignment.copy()
    state = np.uint64(seed if seed > 0 else 1)

    for round_index in range(rounds):
        # Kick a few stands to random targets, then descend again; the kick
        # size cycles so both small and large basins get explored.
        kicks = kick_size * (1 + round_index % 3)
        for _k in range(kicks):
            state = _xorshift(state)
            j = int(state % np.uint64(n_s))
            state = _xorshift(state)
            t_new = int(state % np.uint64(n_t + 1))
            if assignment[j] != t_new:
                _apply_move(prod, vol, j, assignment[j], t_new)
                assignment[j] = t_new
        value = _descend(
            assignment, prod, gaps, vol, demand, weights, aspirations, epsilon,
            move_passes, swap_passes,
        )
        if value < best - 1e-12:
            best = value
            best_assignment[:] = assignment
        else:
            # Restart the next kick from the incumbent.
            for j in range(n_s):
                if assignment[j] != best_assignment[j]:
                    _apply_move(prod, vol, j, assignment[j], best_assignment[j])
                    assignment[j] = best_assignment[j]
    assignment[:] = best_assignment
    return best
