"""Brute-force oracles, deliberately independent of the library's search code."""

from itertools import combinations_with_replacement, permutations

import numpy as np


def best_ladder_margin(V, n):
    """Max over all ordered index sequences and both directions of ``s - r``.

    ``r`` is the max over required-low cells (0 when there are none) and ``s``
    the min over required-high cells (1 when there are none).  Returns -inf
    when the table is too small.
    """
    V = np.asarray(V, dtype=float)
    R, C = V.shape
    if n > min(R, C):
        return -np.inf
    col_perms = np.array(list(permutations(range(C), n)), dtype=int)
    best = -np.inf
    jj = np.arange(n)
    for rows in permutations(range(R), n):
        W = V[list(rows)]  # n x C, W[i, c] = value at row a_i, column c
        for direction in ("high-above", "low-above"):
            hi = np.empty((n, C))
            lo = np.empty((n, C))
            for j in range(n):
                above = W[:j]  # rows i < j
                below = W[j:]  # rows i >= j
                if direction == "high-above":
                    hi[j] = above.min(axis=0) if j else 1.0
                    lo[j] = below.max(axis=0)
                else:
                    hi[j] = below.min(axis=0)
                    lo[j] = above.max(axis=0) if j else 0.0
            s = hi[jj, col_perms].min(axis=1)
            r = lo[jj, col_perms].max(axis=1)
            best = max(best, float((s - r).max()))
    return best


def brute_ladder_index(V, delta):
    V = np.asarray(V, dtype=float)
    k = 0
    for n in range(1, min(V.shape) + 1):
        if best_ladder_margin(V, n) >= delta:
            k = n
        else:
            break
    return k


def brute_majority_k(V, p, k_max):
    """Smallest odd k <= k_max such that some k-multiset of rows has strict
    majority equal to p on every column; None if there is none."""
    V = np.asarray(V, dtype=float)
    p = np.asarray(p, dtype=float)
    for k in range(1, k_max + 1, 2):
        for combo in combinations_with_replacement(range(len(V)), k):
            votes = V[list(combo)].sum(axis=0)
            if np.array_equal((2 * votes > k).astype(float), p):
                return k
    return None


def simplex_grid(k, steps):
    """All weight vectors on the k-simplex with coordinates in multiples of 1/steps."""
    if k == 1:
        return np.array([[1.0]])
    out = []

    def rec(prefix, left, slots):
        if slots == 1:
            out.append(prefix + [left])
            return
        for v in range(left + 1):
            rec(prefix + [v], left - v, slots - 1)

    rec([], steps, k)
    return np.array(out, dtype=float) / steps


def grid_min_error(R, p, steps=100):
    W = simplex_grid(len(R), steps)
    errs = np.max(np.abs(W @ np.asarray(R) - np.asarray(p)), axis=1)
    return float(errs.min())


def dual_lower_bound(R, p):
    """Value of the dual game: a lower bound on max_b |w R - p| valid for every
    w on the simplex, computed with scipy's HiGHS solver."""
    from scipy.optimize import linprog

    R = np.asarray(R, dtype=float)
    p = np.asarray(p, dtype=float)
    k, c = R.shape
    # variables y+ (c), y- (c), v ; maximize v s.t. v <= sum_b (y+ - y-)(R_ib - p_b) for all i
    D = R - p
    cost = np.zeros(2 * c + 1)
    cost[-1] = -1.0
    A_ub = np.hstack([-D, D, np.ones((k, 1))])
    b_ub = np.zeros(k)
    A_eq = np.concatenate([np.ones(2 * c), [0.0]])[None, :]
    bounds = [(0, None)] * (2 * c) + [(None, None)]
    res = linprog(cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=bounds, method="highs")
    assert res.status == 0
    return -res.fun


def oscillation_ok(rows, idx, tol):
    sel = np.asarray(rows, dtype=float)[list(idx)]
    return bool(np.all(sel.max(axis=0) - sel.min(axis=0) <= tol))
