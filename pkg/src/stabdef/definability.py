"""Defining predicates for types, built from the rows of a table.

A type ``p`` (a vector over the columns) is *defined* by a predicate ``psi``
on the columns when ``psi(b) = p[b]`` for every column ``b``.  Two shapes of
``psi`` are constructed here:

* convex combinations ``sum_i w_i * row[a_i]``, either optimal in sup norm
  (:func:`lp_define`) or as a uniform average of ``T`` rows
  (:func:`greedy_define`);
* majority votes of an odd multiset of rows of a Boolean table
  (:func:`majority_define`).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from . import simplex
from .table import FormulaTable
from .types_space import TypePoint, realized_types


@dataclass(frozen=True)
class RowTarget:
    """Target given as a reference to a row of the table."""

    row: int


Target = Union[int, RowTarget, TypePoint, Sequence[float], np.ndarray]


def target_vector(t: FormulaTable, target: Target) -> np.ndarray:
    """Resolve a target to a vector over ``t``'s columns."""
    if isinstance(target, (int, np.integer)):
        target = RowTarget(int(target))
    if isinstance(target, RowTarget):
        if not 0 <= target.row < t.n_rows:
            raise IndexError(f"target row {target.row} out of range [0, {t.n_rows})")
        return t.values[target.row].copy()
    if isinstance(target, TypePoint):
        if target.col_labels is not None and target.col_labels != t.col_labels:
            raise ValueError("target type is over a different column set")
        vec = target.values
    else:
        vec = np.asarray(target, dtype=float).ravel()
    if len(vec) != t.n_cols:
        raise ValueError(f"target has {len(vec)} entries, table has {t.n_cols} columns")
    if np.any(~((vec >= 0) & (vec <= 1))):
        raise ValueError("target entries must lie in [0, 1]")
    return np.array(vec, dtype=float)


@dataclass(frozen=True)
class ConvexDefinition:
    support: tuple[int, ...]
    weights: tuple[float, ...]
    sup_error: float

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(int(i) for i in self.support))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.support) != len(self.weights) or not self.support:
            raise ValueError("support and weights must be non-empty and aligned")
        if len(set(self.support)) != len(self.support):
            raise ValueError("support rows must be distinct")
        if min(self.weights) < 0 or abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError("weights must lie on the probability simplex")

    @classmethod
    def build(cls, t: FormulaTable, support, weights, target: Target) -> "ConvexDefinition":
        """Construct with ``sup_error`` measured against ``target``."""
        support = [int(i) for i in support]
        w = np.asarray(weights, dtype=float)
        p = target_vector(t, target)
        err = float(np.max(np.abs(w @ t.values[support] - p)))
        return cls(tuple(support), tuple(w), err)

    def predicate(self, t: FormulaTable) -> np.ndarray:
        """Values of the defining predicate on the columns of ``t``."""
        return np.asarray(self.weights) @ t.values[list(self.support)]

    def to_dict(self) -> dict:
        return {"kind": "convex", "rows": list(self.support), "weights": list(self.weights),
                "sup_error": self.sup_error, "k": len(self.support)}


@dataclass(frozen=True)
class MajorityDefinition:
    rows: tuple[int, ...]
    k: int = field(init=False)
    exact: bool = True

    def __post_init__(self):
        rows = tuple(sorted(int(i) for i in self.rows))
        if len(rows) % 2 == 0:
            raise ValueError("a majority rule needs an odd number of rows")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "k", len(rows))

    def predicate(self, t: FormulaTable) -> np.ndarray:
        votes = t.values[list(self.rows)].sum(axis=0)
        return (2 * votes > self.k).astype(float)

    def to_dict(self) -> dict:
        return {"kind": "majority", "rows": list(self.rows), "weights": [],
                "sup_error": 0.0 if self.exact else 1.0, "k": self.k}


def verify_definition(t: FormulaTable, definition, target: Target,
                      tol: float = 1e-6) -> tuple[bool, float]:
    """Recompute a definition's error against ``target`` from scratch.

    Convex definitions pass when the sup error is at most ``tol``.  Majority
    definitions must match exactly; the error is then 0 or 1.
    """
    p = target_vector(t, target)
    if isinstance(definition, ConvexDefinition):
        rows = list(definition.support)
        for i in rows:
            if not 0 <= i < t.n_rows:
                raise IndexError(f"row {i} out of range [0, {t.n_rows})")
        err = 0.0
        for b in range(t.n_cols):
            acc = 0.0
            for i, w in zip(rows, definition.weights):
                acc += w * float(t.values[i, b])
            err = max(err, abs(acc - float(p[b])))
        return err <= tol, err
    if isinstance(definition, MajorityDefinition):
        for i in definition.rows:
            if not 0 <= i < t.n_rows:
                raise IndexError(f"row {i} out of range [0, {t.n_rows})")
        ok = True
        for b in range(t.n_cols):
            ones = sum(1 for i in definition.rows if t.values[i, b] == 1.0)
            vote = 1.0 if 2 * ones > definition.k else 0.0
            if vote != p[b]:
                ok = False
                break
        return ok, 0.0 if ok else 1.0
    raise TypeError(f"not a definition: {definition!r}")


# Convex definitions

def _candidates(t: FormulaTable, candidates: Iterable[int] | None) -> list[int]:
    cands = list(range(t.n_rows)) if candidates is None else [int(i) for i in candidates]
    if not cands:
        raise ValueError("candidate row set is empty")
    if len(set(cands)) != len(cands):
        raise ValueError("candidate rows must be distinct")
    for i in cands:
        if not 0 <= i < t.n_rows:
            raise IndexError(f"candidate row {i} out of range [0, {t.n_rows})")
    return cands


def lp_define(t: FormulaTable, target: Target,
              candidates: Iterable[int] | None = None) -> ConvexDefinition:
    """Convex combination of candidate rows closest to ``target`` in sup norm.

    Solves ``min e`` subject to ``|sum_i w_i row_i[b] - p[b]| <= e`` for every
    column ``b`` and ``w`` on the simplex.
    """
    cands = _candidates(t, candidates)
    p = target_vector(t, target)
    R = t.values[cands]  # k x c
    k, c = R.shape
    # variables: w_1..w_k, e
    cost = np.zeros(k + 1)
    cost[-1] = 1.0
    A_ub = np.block([[R.T, -np.ones((c, 1))], [-R.T, -np.ones((c, 1))]])
    b_ub = np.concatenate([p, -p])
    A_eq = np.concatenate([np.ones(k), [0.0]])[None, :]
    res = simplex.linprog(cost, A_ub, b_ub, A_eq, [1.0])
    w = np.clip(res.x[:k], 0.0, None)
    w /= w.sum()
    keep = [i for i in range(k) if w[i] > 1e-12]
    w = w[keep] / w[keep].sum()
    return ConvexDefinition.build(t, [cands[i] for i in keep], w, p)


def greedy_define(t: FormulaTable, target: Target, rounds: int = 1000,
                  candidates: Iterable[int] | None = None) -> ConvexDefinition:
    """Uniform average of ``rounds`` rows chosen by multiplicative weights.

    The adversary keeps exponential weights over the ``2c`` signed column
    errors with learning rate ``sqrt(ln(2c) / rounds)``; each round the row
    with least weighted error is added.  Ties go to the row with smaller sup
    error, then to the lower index.  The average is within
    ``2 * sqrt(ln(2c) / rounds)`` of the optimal sup error.
    """
    if rounds < 1:
        raise ValueError("rounds must be positive")
    cands = _candidates(t, candidates)
    p = target_vector(t, target)
    D = t.values[cands] - p  # signed errors, k x c
    c = D.shape[1]
    eta = math.sqrt(math.log(2 * c) / rounds)
    own = np.max(np.abs(D), axis=1)
    log_plus = np.zeros(c)
    log_minus = np.zeros(c)
    counts = Counter()
    for _ in range(rounds):
        top = max(log_plus.max(), log_minus.max())
        q = np.exp(log_plus - top) - np.exp(log_minus - top)
        loss = D @ q
        best = loss.min()
        tied = np.flatnonzero(loss == best)
        a = int(tied[np.argmin(own[tied])])
        counts[a] += 1
        log_plus += eta * D[a]
        log_minus -= eta * D[a]
    support = sorted(counts)
    weights = [counts[a] / rounds for a in support]
    return ConvexDefinition.build(t, [cands[a] for a in support], weights, p)


def greedy_bound(n_cols: int, rounds: int) -> float:
    """Additive slack of :func:`greedy_define` over the optimum."""
    return 2.0 * math.sqrt(math.log(2 * n_cols) / rounds)


# Majority definitions

def _boolean_target(t: FormulaTable, target: Target) -> np.ndarray:
    if not t.is_boolean:
        raise ValueError("majority definitions need a Boolean table")
    p = target_vector(t, target)
    if not np.all((p == 0) | (p == 1)):
        raise ValueError("majority definitions need a {0,1}-valued target")
    return p


def _majority_search(agree: np.ndarray, k: int) -> list[int] | None:
    """First multiset (lexicographic, nondecreasing rows) of size k whose
    agreement count reaches a strict majority on every column."""
    n_rows, n_cols = agree.shape
    need = (k + 1) // 2
    # rows that agree with the target on column b, from index i onward
    suffix_any = np.zeros((n_rows + 1, n_cols), dtype=bool)
    for i in range(n_rows - 1, -1, -1):
        suffix_any[i] = suffix_any[i + 1] | agree[i]
    chosen: list[int] = []

    def rec(start: int, counts: np.ndarray, open_cols: np.ndarray) -> bool:
        left = k - len(chosen)
        if not open_cols.size:
            if left:
                chosen.extend([start] * left)
            return True
        deficit = need - counts[open_cols]
        if left == 0 or deficit.max() > left:
            return False
        if not np.all(suffix_any[start, open_cols]):
            return False
        for i in range(start, n_rows):
            if not np.all(suffix_any[i, open_cols]):
                break
            chosen.append(i)
            new_counts = counts + agree[i]
            still = open_cols[new_counts[open_cols] < need]
            if rec(i, new_counts, still):
                return True
            chosen.pop()
        return False

    if rec(0, np.zeros(n_cols, dtype=int), np.arange(n_cols)):
        return chosen
    return None


def majority_with_k(t: FormulaTable, target: Target, k: int) -> MajorityDefinition | None:
    """A majority definition using exactly ``k`` rows (repeats allowed), if any."""
    if k < 1 or k % 2 == 0:
        raise ValueError("k must be a positive odd integer")
    p = _boolean_target(t, target)
    agree = (t.values == p[None, :]).astype(int)
    rows = _majority_search(agree, k)
    return None if rows is None else MajorityDefinition(tuple(rows))


def majority_define(t: FormulaTable, target: Target, k_max: int = 5) -> MajorityDefinition | None:
    """Smallest odd ``k <= k_max`` admitting a majority definition of ``target``."""
    if k_max < 1 or k_max % 2 == 0:
        raise ValueError("k_max must be a positive odd integer")
    p = _boolean_target(t, target)
    agree = (t.values == p[None, :]).astype(int)
    if not np.all(agree.any(axis=0)):
        return None  # some column has no agreeing row at all
    for k in range(1, k_max + 1, 2):
        rows = _majority_search(agree, k)
        if rows is not None:
            return MajorityDefinition(tuple(rows))
    return None


@dataclass(frozen=True)
class UniformBound:
    k: int | None
    per_target: tuple[tuple[int | None, ...], ...]
    failing: tuple[int, int] | None = None  # (instance, target) of the first failure

    def to_dict(self) -> dict:
        return {"k": self.k, "per_target": [list(x) for x in self.per_target],
                "failing": None if self.failing is None else list(self.failing)}


def uniform_majority_bound(instances: Sequence[tuple[FormulaTable, Sequence[Target]]],
                           k_max: int = 5) -> UniformBound:
    """One odd ``k`` that defines every target of every instance with exactly ``k`` rows."""
    if k_max < 1 or k_max % 2 == 0:
        raise ValueError("k_max must be a positive odd integer")
    for t, _ in instances:
        if not t.is_boolean:
            raise ValueError("all tables must be Boolean")
    per = []
    failing = None
    for n, (t, targets) in enumerate(instances):
        ks = []
        for m, target in enumerate(targets):
            d = majority_define(t, target, k_max)
            ks.append(None if d is None else d.k)
            if d is None and failing is None:
                failing = (n, m)
        per.append(tuple(ks))
    per = tuple(per)
    if failing is not None:
        return UniformBound(None, per, failing)
    start = max((k for ks in per for k in ks), default=1)
    last_fail = None
    for k in range(start, k_max + 1, 2):
        last_fail = None
        for n, (t, targets) in enumerate(instances):
            for m, target in enumerate(targets):
                if majority_with_k(t, target, k) is None:
                    last_fail = (n, m)
                    break
            if last_fail:
                break
        if last_fail is None:
            return UniformBound(k, per)
    return UniformBound(None, per, last_fail)


def definability_report(t: FormulaTable, tols: Sequence[float] = (1e-6,), rounds: int = 1000,
                        k_max: int = 5) -> dict:
    """Define every realized type of ``t`` and tabulate errors and vote sizes."""
    boolean = t.is_boolean
    records = []
    for rt in realized_types(t, 0.0):
        target = RowTarget(rt.representative)
        lp = lp_define(t, target)
        gr = greedy_define(t, target, rounds)
        rec = {
            "row": rt.representative,
            "multiplicity": rt.multiplicity,
            "lp_error": lp.sup_error,
            "greedy_error": gr.sup_error,
        }
        if boolean:
            maj = majority_define(t, target, k_max)
            rec["majority_k"] = None if maj is None else maj.k
        records.append(rec)
    agg = {
        "types": len(records),
        "max_lp_error": max(r["lp_error"] for r in records),
        "max_greedy_error": max(r["greedy_error"] for r in records),
        "definable": {repr(float(tol)): sum(r["lp_error"] <= tol for r in records) for tol in tols},
    }
    if boolean:
        ks = [r["majority_k"] for r in records]
        agg["max_majority_k"] = None if None in ks else max(ks)
    return {"types": records, "aggregate": agg, "rounds": rounds, "k_max": k_max}
