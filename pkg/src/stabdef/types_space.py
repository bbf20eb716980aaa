"""Realized types over a finite column set and the sup metric on them.

A type here is a vector indexed by the columns of a table: the values
``phi(p, b)`` for each column parameter ``b``.  Rows of a table are the
realized types.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .table import FormulaTable


def columns_digest(col_labels: Sequence[str]) -> str:
    h = hashlib.sha256("\x1f".join(col_labels).encode("utf-8"))
    return h.hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class TypePoint:
    values: np.ndarray
    col_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if np.any(~((v >= 0) & (v <= 1))):
            raise ValueError("type values must lie in [0, 1]")
        if self.col_labels is not None:
            labels = tuple(self.col_labels)
            if len(labels) != len(v):
                raise ValueError(f"{len(v)} values for {len(labels)} columns")
            object.__setattr__(self, "col_labels", labels)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)

    def __eq__(self, other):
        if not isinstance(other, TypePoint):
            return NotImplemented
        return self.col_labels == other.col_labels and np.array_equal(self.values, other.values)

    __hash__ = None

    @classmethod
    def of_row(cls, t: FormulaTable, i: int) -> "TypePoint":
        return cls(t.values[i], t.col_labels)

    def to_dict(self) -> dict:
        d = {"values": [float(x) for x in self.values]}
        if self.col_labels is not None:
            d["columns"] = columns_digest(self.col_labels)
        return d


def _vec(p) -> np.ndarray:
    return p.values if isinstance(p, TypePoint) else np.asarray(p, dtype=float)


def sup_dist(p, q) -> float:
    """Uniform distance ``max_b |p[b] - q[b]|``."""
    if isinstance(p, TypePoint) and isinstance(q, TypePoint):
        if p.col_labels is not None and q.col_labels is not None and p.col_labels != q.col_labels:
            raise ValueError("types are over different column sets")
    u, v = _vec(p), _vec(q)
    if u.shape != v.shape:
        raise ValueError(f"column counts differ: {u.shape} vs {v.shape}")
    if u.size == 0:
        return 0.0
    return float(np.max(np.abs(u - v)))


def distance_matrix(t: FormulaTable) -> np.ndarray:
    v = t.values
    return np.max(np.abs(v[:, None, :] - v[None, :, :]), axis=2)


@dataclass(frozen=True)
class RealizedType:
    representative: int  # row index of the first member
    members: tuple[int, ...]

    @property
    def multiplicity(self) -> int:
        return len(self.members)


def realized_types(t: FormulaTable, tol: float = 0.0) -> list[RealizedType]:
    """Greedy deduplication of rows in row order.

    A row joins the first representative within ``tol`` (sup distance),
    otherwise it founds a new class.  The result depends on row order.
    """
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    reps: list[int] = []
    members: list[list[int]] = []
    for i in range(t.n_rows):
        row = t.values[i]
        for k, rep in enumerate(reps):
            if sup_dist(row, t.values[rep]) <= tol:
                members[k].append(i)
                break
        else:
            reps.append(i)
            members.append([i])
    return [RealizedType(r, tuple(m)) for r, m in zip(reps, members)]


@dataclass(frozen=True)
class NetSize:
    size: int
    centers: tuple[int, ...]
    exact: bool
    lower: int  # packing lower bound

    def to_dict(self) -> dict:
        return {"size": self.size, "centers": list(self.centers), "exact": self.exact,
                "lower_bound": self.lower}


EXACT_NET_ROWS = 20


def _ball_masks(d: np.ndarray, eps: float) -> list[int]:
    masks = []
    for i in range(len(d)):
        m = 0
        for j in np.flatnonzero(d[i] <= eps):
            m |= 1 << int(j)
        masks.append(m)
    return masks


def greedy_net(d: np.ndarray, eps: float) -> list[int]:
    """Greedy set cover by eps-balls centered at rows (largest new coverage first)."""
    masks = _ball_masks(d, eps)
    uncovered = (1 << len(d)) - 1
    centers = []
    while uncovered:
        best = max(range(len(d)), key=lambda i: (bin(masks[i] & uncovered).count("1"), -i))
        centers.append(best)
        uncovered &= ~masks[best]
    return centers


def packing_lower_bound(d: np.ndarray, eps: float) -> int:
    """Size of a greedy set of rows pairwise more than ``2 eps`` apart.

    No eps-ball can contain two such rows, so every eps-net needs at least
    this many centers.
    """
    chosen: list[int] = []
    for i in range(len(d)):
        if all(d[i, j] > 2 * eps for j in chosen):
            chosen.append(i)
    return len(chosen)


def exact_net(d: np.ndarray, eps: float, lower: int = 1) -> list[int]:
    """Minimum set cover by eps-balls centered at rows, by increasing size."""
    n = len(d)
    masks = _ball_masks(d, eps)
    full = (1 << n) - 1
    # drop centers whose ball is contained in an earlier-or-equal one
    keep = []
    for i in range(n):
        if not any((masks[i] | masks[j]) == masks[j] and (masks[j] != masks[i] or j < i)
                   for j in range(n) if j != i):
            keep.append(i)
    for k in range(max(1, lower), n + 1):
        for combo in combinations(keep, k):
            cover = 0
            for i in combo:
                cover |= masks[i]
            if cover == full:
                return list(combo)
    return list(range(n))


def density_character(t: FormulaTable, eps: float, exact_rows: int = EXACT_NET_ROWS) -> NetSize:
    """Minimal size of an eps-net of the rows under the sup metric.

    Exact (exhaustive set cover) when the table has at most ``exact_rows``
    rows; otherwise a greedy cover, flagged ``exact=False``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    d = distance_matrix(t)
    lower = packing_lower_bound(d, eps)
    if t.n_rows <= exact_rows:
        centers = exact_net(d, eps, lower)
        return NetSize(len(centers), tuple(centers), True, lower)
    centers = greedy_net(d, eps)
    return NetSize(len(centers), tuple(centers), False, lower)


def oscillation(rows: np.ndarray) -> np.ndarray:
    """Per-column ``max - min`` across the given rows."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    return rows.max(axis=0) - rows.min(axis=0)


def _largest_bucket_chain(vals: np.ndarray, tol: float) -> list[int]:
    n_bins = math.ceil(1.0 / tol)
    # bin k covers [k/B, (k+1)/B); the top bin is closed at 1
    bins = np.minimum((vals * n_bins).astype(int), n_bins - 1)
    alive = np.arange(len(vals))
    for c in range(vals.shape[1]):
        counts = np.bincount(bins[alive, c], minlength=n_bins)
        keep = int(np.argmax(counts))  # first largest bucket
        alive = alive[bins[alive, c] == keep]
    return alive.tolist()


def _largest_box(vals: np.ndarray, tol: float) -> list[int]:
    """Largest subset whose every column has oscillation at most tol.

    An optimal box can be slid down until each lower face touches a member,
    so lower corners range over data values coordinate by coordinate.
    """
    n, c = vals.shape
    best: list[int] = []

    def rec(alive: np.ndarray, col: int):
        nonlocal best
        if len(alive) <= len(best):
            return
        if col == c:
            best = sorted(alive.tolist())
            return
        col_vals = vals[alive, col]
        for lo in np.unique(col_vals):
            sel = alive[(col_vals >= lo) & (col_vals - lo <= tol)]
            rec(sel, col + 1)

    rec(np.arange(n), 0)
    return best


def extract_convergent_subsequence(rows, tol: float, method: str = "buckets"):
    """Pick a subsequence of rows along which every coordinate varies by at most ``tol``.

    ``method="buckets"`` is the pigeonhole diagonal: split ``[0, 1]`` into
    ``ceil(1/tol)`` bins and, column by column, keep the fullest bin.
    ``method="box"`` returns a largest such subsequence.  Returns the
    increasing index list and the coordinatewise mean of the selected rows.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    vals = np.array([_vec(r) for r in rows], dtype=float)
    if vals.ndim != 2 or len(vals) < 2:
        raise ValueError("need at least two rows")
    if method == "buckets":
        idx = _largest_bucket_chain(vals, tol)
    elif method == "box":
        idx = _largest_box(vals, tol)
    else:
        raise ValueError(f"unknown method {method!r}")
    labels = rows[0].col_labels if isinstance(rows[0], TypePoint) else None
    limit = TypePoint(np.clip(vals[idx].mean(axis=0), 0.0, 1.0), labels)
    return idx, limit
