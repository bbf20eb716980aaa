"""Dense two-phase tableau simplex with Bland's least-index rule.

Small, deterministic, and exact enough for the minimax fitting problems in
:mod:`stabdef.definability`.  Solves::

    minimize c @ x  subject to  A_ub @ x <= b_ub,  A_eq @ x == b_eq,  x >= 0
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPS = 1e-11


class LPError(ArithmeticError):
    pass


class Infeasible(LPError):
    pass


class Unbounded(LPError):
    pass


@dataclass
class LPResult:
    x: np.ndarray
    fun: float
    iterations: int


def _pivot(T: np.ndarray, row: int, col: int):
    T[row] /= T[row, col]
    for i in range(T.shape[0]):
        if i != row and T[i, col] != 0.0:
            T[i] -= T[i, col] * T[row]


def _run(T: np.ndarray, basis: list[int], allowed: int, max_iter: int) -> int:
    """Iterate on tableau ``T`` whose last row is the reduced-cost row.

    Only columns ``< allowed`` may enter.  Returns the iteration count.
    """
    m = T.shape[0] - 1
    for it in range(max_iter):
        cost = T[-1, :allowed]
        entering = next((j for j in range(allowed) if cost[j] < -EPS), None)
        if entering is None:
            return it
        col = T[:m, entering]
        best, leave = None, None
        for i in range(m):
            if col[i] > EPS:
                ratio = T[i, -1] / col[i]
                if best is None or ratio < best - EPS or (abs(ratio - best) <= EPS and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            raise Unbounded("objective is unbounded below")
        _pivot(T, leave, entering)
        basis[leave] = entering
    raise LPError(f"no convergence after {max_iter} pivots")


def linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, max_iter: int = 10_000) -> LPResult:
    c = np.asarray(c, dtype=float)
    n = len(c)
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    m_ub, m_eq = len(b_ub), len(b_eq)
    m = m_ub + m_eq

    # columns: original | slacks | artificials | rhs
    n_total = n + m_ub + m
    T = np.zeros((m + 1, n_total + 1))
    T[:m_ub, :n] = A_ub
    T[:m_ub, n:n + m_ub] = np.eye(m_ub)
    T[:m_ub, -1] = b_ub
    T[m_ub:m, :n] = A_eq
    T[m_ub:m, -1] = b_eq
    neg = T[:m, -1] < 0
    T[:m][neg] *= -1
    T[:m, n + m_ub:n + m_ub + m] = np.eye(m)
    basis = list(range(n + m_ub, n + m_ub + m))

    # phase 1: minimize the sum of artificials
    T[-1, :] = 0.0
    T[-1, n + m_ub:n + m_ub + m] = 1.0
    for i in range(m):
        T[-1] -= T[i]
    iters = _run(T, basis, n_total, max_iter)
    if T[-1, -1] < -1e-9:
        raise Infeasible("constraints are infeasible")

    # drive remaining artificials out of the basis
    for i in range(m):
        if basis[i] >= n + m_ub:
            j = next((j for j in range(n + m_ub) if abs(T[i, j]) > EPS), None)
            if j is not None:
                _pivot(T, i, j)
                basis[i] = j

    # phase 2 on the original objective, artificials frozen out
    T[-1, :] = 0.0
    T[-1, :n] = c
    for i, b in enumerate(basis):
        if b < n + m_ub and T[-1, b] != 0.0:
            T[-1] -= T[-1, b] * T[i]
    iters += _run(T, basis, n + m_ub, max_iter)

    x = np.zeros(n_total)
    for i, b in enumerate(basis):
        x[b] = T[i, -1]
    x = x[:n]
    return LPResult(x, float(c @ x), iters)
