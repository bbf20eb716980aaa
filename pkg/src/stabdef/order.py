"""Order property: ladders in finite tables and iterated double limits.

A ladder of length ``n`` and margin ``s - r`` is a pair of index sequences
``a_1..a_n`` (rows) and ``b_1..b_n`` (columns) such that, in the
``high-above`` direction, ``V[a_i][b_j] >= s`` whenever ``i < j`` and
``V[a_i][b_j] <= r`` whenever ``i >= j``.  ``low-above`` swaps the two
conditions.  Long ladders with a fixed margin are the finite witnesses that
the two iterated limits ``lim_n lim_m`` and ``lim_m lim_n`` can disagree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .kernel import Expr, as_points, sample_grid
from .table import FormulaTable

HIGH_ABOVE = "high-above"
LOW_ABOVE = "low-above"
DIRECTIONS = (HIGH_ABOVE, LOW_ABOVE)


@dataclass(frozen=True)
class Ladder:
    row_indices: tuple[int, ...]
    col_indices: tuple[int, ...]
    r: float
    s: float
    direction: str = HIGH_ABOVE

    def __post_init__(self):
        object.__setattr__(self, "row_indices", tuple(int(i) for i in self.row_indices))
        object.__setattr__(self, "col_indices", tuple(int(j) for j in self.col_indices))
        if self.direction not in DIRECTIONS:
            raise ValueError(f"unknown ladder direction {self.direction!r}")

    def __len__(self):
        return len(self.row_indices)

    @property
    def margin(self) -> float:
        return self.s - self.r

    def to_dict(self) -> dict:
        return {
            "rows": list(self.row_indices),
            "cols": list(self.col_indices),
            "r": self.r,
            "s": self.s,
            "direction": self.direction,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Ladder":
        return cls(d["rows"], d["cols"], float(d["r"]), float(d["s"]), d["direction"])


def _upper_mask(n: int) -> np.ndarray:
    i = np.arange(n)
    return i[:, None] < i[None, :]


def verify_ladder(t: FormulaTable, ladder: Ladder) -> bool:
    """Check the ladder pattern exactly against ``t``."""
    rows, cols = ladder.row_indices, ladder.col_indices
    if len(rows) != len(cols) or not rows:
        raise ValueError("ladder needs equally many (>= 1) row and column indices")
    if len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
        raise ValueError("ladder indices must be pairwise distinct")
    for name, idx, bound in (("row", rows, t.n_rows), ("column", cols, t.n_cols)):
        for i in idx:
            if not 0 <= i < bound:
                raise IndexError(f"{name} index {i} out of range [0, {bound})")
    if not (0.0 <= ladder.r < ladder.s <= 1.0):
        return False
    sub = t.values[np.ix_(rows, cols)]
    upper = _upper_mask(len(rows))
    if ladder.direction == HIGH_ABOVE:
        high, low = sub[upper], sub[~upper]
    else:
        high, low = sub[~upper], sub[upper]
    return bool(np.all(high >= ladder.s) and np.all(low <= ladder.r))


def pattern_thresholds(values: np.ndarray, rows: Sequence[int], cols: Sequence[int],
                       direction: str) -> tuple[float, float]:
    """Tightest ``(r, s)`` for the given index sequences.

    ``r`` is the max over the cells required low (0 if there are none) and
    ``s`` the min over the cells required high (1 if there are none).
    """
    sub = np.asarray(values)[np.ix_(list(rows), list(cols))]
    upper = _upper_mask(len(rows))
    if direction == HIGH_ABOVE:
        high, low = sub[upper], sub[~upper]
    else:
        high, low = sub[~upper], sub[upper]
    r = float(low.max()) if low.size else 0.0
    s = float(high.min()) if high.size else 1.0
    return r, s


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _popcount(mask: int) -> int:
    return bin(mask).count("1")


class _Masks:
    """Bitset view of one (direction, r) search problem.

    ``diag`` holds the cells allowed on or below the diagonal (``i >= j``),
    ``upper`` those allowed strictly above it.
    """

    __slots__ = ("diag_row", "diag_col", "upper_row", "n_rows", "n_cols")

    def __init__(self, diag: np.ndarray, upper: np.ndarray):
        self.n_rows, self.n_cols = diag.shape
        self.diag_row = [_pack(diag[a]) for a in range(self.n_rows)]
        self.diag_col = [_pack(diag[:, b]) for b in range(self.n_cols)]
        self.upper_row = [_pack(upper[a]) for a in range(self.n_rows)]

    def key(self):
        return tuple(self.diag_row), tuple(self.upper_row)


def _pack(flags: np.ndarray) -> int:
    m = 0
    for k in np.flatnonzero(flags):
        m |= 1 << int(k)
    return m


def _threshold_candidates(values: np.ndarray, margin: float) -> list[float]:
    cands = np.unique(np.concatenate([values.ravel(), [0.0]]))
    return [float(r) for r in cands if 1.0 - r >= margin]


def _problems(t: FormulaTable, margin: float) -> Iterator[tuple[str, float, _Masks]]:
    """Distinct bitset problems, in search order: direction, then r ascending."""
    v = t.values
    for direction in DIRECTIONS:
        seen = set()
        for r in _threshold_candidates(v, margin):
            low = v <= r
            high = (v - r) >= margin
            masks = _Masks(low, high) if direction == HIGH_ABOVE else _Masks(high, low)
            key = masks.key()
            if key in seen:
                continue
            seen.add(key)
            yield direction, r, masks


def _search(m: _Masks, n: int) -> tuple[list[int], list[int]] | None:
    """Lexicographically first (rows outer, columns inner) ladder of length n."""
    failed = set()
    seq_a: list[int] = []
    seq_b: list[int] = []

    def dfs(rowcand: int, colcand: int) -> bool:
        k = len(seq_a)
        if k == n:
            return True
        state = (rowcand, colcand, k)
        if state in failed:
            return False
        need = n - k - 1
        for a in _bits(rowcand):
            rc = rowcand & ~(1 << a)
            if _popcount(rc) < need:
                break
            nc_base = colcand & m.upper_row[a]
            for b in _bits(colcand & m.diag_row[a]):
                nr = rc & m.diag_col[b]
                nc = nc_base & ~(1 << b)
                if _popcount(nr) < need or _popcount(nc) < need:
                    continue
                seq_a.append(a)
                seq_b.append(b)
                if dfs(nr, nc):
                    return True
                seq_a.pop()
                seq_b.pop()
        failed.add(state)
        return False

    full_r = (1 << m.n_rows) - 1
    full_c = (1 << m.n_cols) - 1
    if dfs(full_r, full_c):
        return list(seq_a), list(seq_b)
    return None


def _check_margin(margin: float):
    if not 0.0 < margin <= 1.0:
        raise ValueError(f"margin must lie in (0, 1], got {margin}")


def find_ladder(t: FormulaTable, n: int, margin: float) -> Ladder | None:
    """Exhaustive search for a ladder of length ``n`` with ``s - r >= margin``.

    Returns ``None`` iff no such ladder exists in either direction.
    """
    _check_margin(margin)
    if not 1 <= n <= min(t.shape):
        raise ValueError(f"ladder length {n} outside [1, {min(t.shape)}]")
    for direction, _, masks in _problems(t, margin):
        found = _search(masks, n)
        if found is not None:
            rows, cols = found
            r, s = pattern_thresholds(t.values, rows, cols, direction)
            return Ladder(rows, cols, r, s, direction)
    return None


def ladder_index(t: FormulaTable, margin: float) -> int:
    """Largest ``n`` for which a margin-``margin`` ladder exists (0 if none)."""
    _check_margin(margin)
    best = 0
    for n in range(1, min(t.shape) + 1):
        if find_ladder(t, n, margin) is None:
            break
        best = n
    return best


def ladder_lower_bound(t: FormulaTable, margin: float, seed: int = 0,
                       budget: int = 64) -> Ladder | None:
    """Randomized greedy ladder construction for tables too large to exhaust.

    Each iteration draws a direction and threshold at random and grows a
    ladder pair by pair, keeping the pair that leaves the most candidates
    (random tie-breaking).  The longest ladder over ``budget`` iterations is
    returned; it always verifies.
    """
    _check_margin(margin)
    rng = np.random.default_rng(seed)
    problems = list(_problems(t, margin))
    if not problems:
        return None
    best = None
    for _ in range(max(1, budget)):
        direction, _, m = problems[int(rng.integers(len(problems)))]
        rowcand = (1 << m.n_rows) - 1
        colcand = (1 << m.n_cols) - 1
        seq_a, seq_b = [], []
        while True:
            top, choices = -1, []
            for a in _bits(rowcand):
                rc = rowcand & ~(1 << a)
                nc_base = colcand & m.upper_row[a]
                for b in _bits(colcand & m.diag_row[a]):
                    score = min(_popcount(rc & m.diag_col[b]), _popcount(nc_base & ~(1 << b)))
                    if score > top:
                        top, choices = score, [(a, b)]
                    elif score == top:
                        choices.append((a, b))
            if not choices:
                break
            a, b = choices[int(rng.integers(len(choices)))]
            seq_a.append(a)
            seq_b.append(b)
            rowcand = rowcand & ~(1 << a) & m.diag_col[b]
            colcand = colcand & ~(1 << b) & m.upper_row[a]
        if seq_a and (best is None or len(seq_a) > len(best[1])):
            best = (direction, seq_a, seq_b)
            if len(seq_a) == min(t.shape):
                break
    if best is None:
        return None
    direction, rows, cols = best
    r, s = pattern_thresholds(t.values, rows, cols, direction)
    return Ladder(rows, cols, r, s, direction)


# Iterated double limits

@dataclass(frozen=True)
class DoubleLimitReport:
    """Outcome of a finite iterated-limit estimate.

    ``limit_nm`` estimates ``lim_n lim_m phi(a_n, b_m)`` and ``limit_mn`` the
    limit taken in the other order; ``None`` means the window rule did not
    declare convergence.  ``outer`` is the half-open index range probed by
    the outer limit; inner limits always read the last ``window`` terms.
    """

    limit_nm: float | None
    limit_mn: float | None
    gap: float | None
    window: int
    tolerance: float
    outer_nm: tuple[int, int]
    outer_mn: tuple[int, int]

    def to_dict(self) -> dict:
        return {
            "limit_nm": self.limit_nm,
            "limit_mn": self.limit_mn,
            "gap": self.gap,
            "window": self.window,
            "tolerance": self.tolerance,
            "outer_nm": list(self.outer_nm),
            "outer_mn": list(self.outer_mn),
        }


def window_limit(values: Sequence[float | None], window: int, tol: float) -> float | None:
    """Declare convergence when the last ``window`` values span at most ``tol``.

    The limit is the common value when the tail is exactly constant and the
    tail mean otherwise.  Any missing value in the tail means no limit.
    """
    tail = list(values)[-window:]
    if len(tail) < window or any(v is None for v in tail):
        return None
    lo, hi = min(tail), max(tail)
    if lo == hi:
        return float(lo)
    if hi - lo > tol:
        return None
    return float(np.mean(tail))


def iterated_limits(grid: np.ndarray, window: int, tol: float) -> DoubleLimitReport:
    """Both iterated limits of a finite grid ``grid[n][m]``.

    The inner limit is read off the last ``window`` terms of the inner index.
    The outer limit is read off the last ``window`` terms of the *first half*
    of the outer index, so every inner tail lies strictly beyond the outer
    window; that separation is what lets an iterated limit show at all on a
    square finite grid.
    """
    grid = np.asarray(grid, dtype=float)
    n_len, m_len = grid.shape
    if window < 2:
        raise ValueError("window must be at least 2")
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if n_len < 2 * window or m_len < 2 * window:
        raise ValueError(
            f"sequences of length {n_len} and {m_len} are too short for window {window}"
        )
    inner_rows = [window_limit(grid[n], window, tol) for n in range(n_len)]
    inner_cols = [window_limit(grid[:, m], window, tol) for m in range(m_len)]
    outer_nm = (n_len // 2 - window, n_len // 2)
    outer_mn = (m_len // 2 - window, m_len // 2)
    nm = window_limit(inner_rows[outer_nm[0]:outer_nm[1]], window, tol)
    mn = window_limit(inner_cols[outer_mn[0]:outer_mn[1]], window, tol)
    gap = abs(nm - mn) if nm is not None and mn is not None else None
    return DoubleLimitReport(nm, mn, gap, window, tol, outer_nm, outer_mn)


def double_limit(e: Expr, xs, ys, window: int = 5, tol: float = 1e-2) -> DoubleLimitReport:
    """Estimate ``lim_n lim_m e(a_n, b_m)`` and ``lim_m lim_n e(a_n, b_m)``."""
    xs, ys = as_points(xs), as_points(ys)
    if len(xs) < 2 * window or len(ys) < 2 * window:
        raise ValueError(
            f"need at least {2 * window} terms per sequence, got {len(xs)} and {len(ys)}"
        )
    return iterated_limits(sample_grid(e, xs, ys), window, tol)


def ladder_to_gap(e: Expr, a_seq: Sequence[float], b_seq: Sequence[float],
                  window: int = 5, tol: float = 1e-2) -> DoubleLimitReport:
    """Double-limit report along two strictly monotone one-dimensional samplings.

    The caller vouches that the sequences interleave the way a ladder family
    does; a margin-``delta`` family should then show ``gap >= delta - tol``.
    """
    for name, seq in (("a", a_seq), ("b", b_seq)):
        d = np.diff(np.asarray(seq, dtype=float))
        if not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError(f"sequence {name} is not strictly monotone")
    return double_limit(e, np.asarray(a_seq, float)[:, None], np.asarray(b_seq, float)[:, None],
                        window, tol)
