"""Finite formula tables.

A :class:`FormulaTable` holds the values ``phi(a, b)`` of a two-variable
formula on finitely many row parameters ``a`` and column parameters ``b``.
Values live in ``[0, 1]``.  Truth values are encoded the conventional way,
``True = 1`` and ``False = 0``; every search in this package is symmetric
under ``v -> 1 - v`` so the choice does not affect any verdict.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class TableError(ValueError):
    """Base class for table construction failures."""


class TableParseError(TableError):
    """A table file could not be parsed.  ``line`` and ``column`` are 1-based."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class TableValidationError(TableError):
    """A table parsed but violates an invariant (range, shape, labels)."""

    def __init__(self, message: str, row: int | None = None, col: int | None = None):
        if row is not None:
            message = f"row {row}, col {col}: {message}"
        super().__init__(message)
        self.row = row
        self.col = col


@dataclass(frozen=True, eq=False)
class FormulaTable:
    values: np.ndarray
    row_labels: tuple[str, ...] = field(default=())
    col_labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 2:
            raise TableValidationError(f"values must be 2-dimensional, got shape {vals.shape}")
        n_rows, n_cols = vals.shape
        bad = np.argwhere(~((vals >= 0.0) & (vals <= 1.0)))
        if len(bad):
            i, j = bad[0]
            raise TableValidationError(
                f"value {vals[i, j]!r} outside [0, 1]", row=int(i) + 1, col=int(j) + 1
            )
        rows = tuple(str(x) for x in self.row_labels) or tuple(f"r{i}" for i in range(n_rows))
        cols = tuple(str(x) for x in self.col_labels) or tuple(f"c{j}" for j in range(n_cols))
        if len(rows) != n_rows or len(cols) != n_cols:
            raise TableValidationError(
                f"label counts ({len(rows)}, {len(cols)}) do not match shape {vals.shape}"
            )
        for axis, labels in (("row", rows), ("column", cols)):
            if len(set(labels)) != len(labels):
                raise TableValidationError(f"duplicate {axis} labels")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "row_labels", rows)
        object.__setattr__(self, "col_labels", cols)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    @property
    def is_boolean(self) -> bool:
        """True iff every entry is exactly 0 or 1 (always recomputed)."""
        v = self.values
        return bool(np.all((v == 0.0) | (v == 1.0)))

    def row(self, i: int) -> np.ndarray:
        return self.values[i]

    def __eq__(self, other):
        if not isinstance(other, FormulaTable):
            return NotImplemented
        return (
            self.row_labels == other.row_labels
            and self.col_labels == other.col_labels
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def __repr__(self):
        return f"FormulaTable(shape={self.shape}, boolean={self.is_boolean})"


@dataclass(frozen=True, eq=False)
class GroupFunction:
    """A finite group given by its Cayley table together with a function on it.

    ``cayley[g][h]`` is the index of the product ``g * h``.
    """

    cayley: np.ndarray
    f_values: np.ndarray

    def __post_init__(self):
        cay = np.asarray(self.cayley)
        f = np.asarray(self.f_values, dtype=float)
        n = len(f)
        if n < 1:
            raise TableValidationError("group order must be positive")
        if cay.shape != (n, n):
            raise TableValidationError(f"cayley table must be {n}x{n}, got {cay.shape}")
        target = np.arange(n)
        for axis in (0, 1):
            for k in range(n):
                line = cay[k] if axis == 0 else cay[:, k]
                if not np.array_equal(np.sort(line), target):
                    kind = "row" if axis == 0 else "column"
                    raise TableValidationError(f"cayley {kind} {k} is not a permutation of 0..{n - 1}")
        if np.any((f < 0) | (f > 1)):
            raise TableValidationError("f_values must lie in [0, 1]")
        object.__setattr__(self, "cayley", cay.astype(int))
        object.__setattr__(self, "f_values", f)

    @property
    def order(self) -> int:
        return len(self.f_values)

    @classmethod
    def cyclic(cls, f_values: Sequence[float]) -> "GroupFunction":
        n = len(f_values)
        idx = np.arange(n)
        return cls((idx[:, None] + idx[None, :]) % n, f_values)


def transpose(t: FormulaTable) -> FormulaTable:
    """The tilde table: ``transpose(t)[j][i] == t[i][j]``, labels swapped."""
    return FormulaTable(t.values.T.copy(), t.col_labels, t.row_labels)


def restrict(t: FormulaTable, rows: Iterable[int] | None = None,
             cols: Iterable[int] | None = None) -> FormulaTable:
    """Sub-table on the given row and column indices (``None`` keeps the axis)."""
    rows = list(range(t.n_rows)) if rows is None else [int(i) for i in rows]
    cols = list(range(t.n_cols)) if cols is None else [int(j) for j in cols]
    if not rows or not cols:
        raise TableValidationError("restriction needs non-empty row and column subsets")
    for name, idx, bound in (("row", rows, t.n_rows), ("column", cols, t.n_cols)):
        for i in idx:
            if not 0 <= i < bound:
                raise IndexError(f"{name} index {i} out of range [0, {bound})")
    return FormulaTable(
        t.values[np.ix_(rows, cols)],
        [t.row_labels[i] for i in rows],
        [t.col_labels[j] for j in cols],
    )


def from_group(g: GroupFunction) -> FormulaTable:
    """Translation table ``V[g][h] = f(g * h)``; rows are the translates of ``f``."""
    labels = [f"g{i}" for i in range(g.order)]
    return FormulaTable(g.f_values[g.cayley], labels, labels)


# Canonical tables used throughout tests and demos.

def half_graph(n: int) -> FormulaTable:
    """Strict half graph: value 1 iff i < j."""
    i = np.arange(n)
    return FormulaTable((i[:, None] < i[None, :]).astype(float))


def identity(n: int) -> FormulaTable:
    return FormulaTable(np.eye(n))


def constant(n_rows: int, n_cols: int, c: float) -> FormulaTable:
    return FormulaTable(np.full((n_rows, n_cols), float(c)))


# CSV input/output

def _parse_number(cell: str, line: int, column: int) -> float:
    text = cell.strip()
    try:
        value = float(text)
    except ValueError:
        raise TableParseError(f"expected a decimal number, got {text!r}", line, column) from None
    if text.lower().lstrip("+-") in ("nan", "inf", "infinity"):
        raise TableParseError(f"expected a decimal number, got {text!r}", line, column)
    return value


def parse_table(text: str) -> FormulaTable:
    """Parse the CSV table format.

    An optional first line starting with ``#`` carries column labels.  If the
    first header cell is the literal ``labels``, every data line starts with a
    row label.  Other cells are decimals in ``[0, 1]``.
    """
    lines = text.replace("\r\n", "\n").split("\n")
    col_labels = None
    has_row_labels = False
    data = []
    row_labels = []
    width = None
    for lineno, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        if col_labels is None and not data and raw.startswith("#"):
            header = next(csv.reader([raw[1:]]))
            header = [h.strip() for h in header]
            if header and header[0] == "labels":
                has_row_labels = True
                header = header[1:]
            col_labels = header
            continue
        cells = next(csv.reader([raw]))
        if has_row_labels:
            row_labels.append(cells[0].strip())
            cells = cells[1:]
            offset = 1
        else:
            offset = 0
        if width is None:
            width = len(cells)
            if width == 0:
                raise TableParseError("row has no values", lineno, 1)
        elif len(cells) != width:
            raise TableParseError(
                f"expected {width} values, found {len(cells)}", lineno, min(len(cells), width) + 1 + offset
            )
        data.append([_parse_number(c, lineno, k + 1 + offset) for k, c in enumerate(cells)])
    if not data:
        raise TableParseError("no data rows", max(len(lines), 1), 1)
    if col_labels is not None and len(col_labels) != width:
        raise TableParseError(f"header names {len(col_labels)} columns, data has {width}", 1, 1)
    return FormulaTable(np.array(data), row_labels or (), col_labels or ())


def load_table(path: str | Path, format: str = "csv") -> FormulaTable:
    if format != "csv":
        raise ValueError(f"unsupported table format {format!r}")
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_table(fh.read())


def format_table(t: FormulaTable) -> str:
    out = io.StringIO()
    out.write("#labels," + ",".join(t.col_labels) + "\n")
    for label, row in zip(t.row_labels, t.values):
        out.write(label + "," + ",".join(repr(float(v)) for v in row) + "\n")
    return out.getvalue()


def save_table(t: FormulaTable, path: str | Path) -> None:
    Path(path).write_text(format_table(t), encoding="utf-8")
