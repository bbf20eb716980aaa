"""A small expression language for kernels ``phi(x, y)`` over real vectors.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := NUMBER | coord | call | '-' factor | '(' expr ')'
    coord  := ('x' | 'y') '[' INT ']'
    call   := IDENT '(' expr (',' expr)* ')'

with ``IDENT`` one of ``min max abs pow dot dist2 lt le``.  ``dot`` and
``dist2`` take the bare identifiers ``x`` / ``y`` as whole-vector arguments.

Evaluation is plain binary64 arithmetic, left to right, and the final value is
clamped to ``[0, 1]``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .table import FormulaTable, TableParseError


class KernelSyntaxError(ValueError):
    def __init__(self, message: str, offset: int, expected: Sequence[str] = ()):
        self.offset = offset
        self.expected = tuple(expected)
        if self.expected:
            message += " (expected " + " or ".join(f"'{e}'" for e in self.expected) + ")"
        super().__init__(f"offset {offset}: {message}")


class KernelEvalError(ArithmeticError):
    """Raised for division by zero and other non-finite intermediate results."""


class KernelDimensionError(ValueError):
    pass


# AST

@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Coord:
    side: str
    index: int


@dataclass(frozen=True)
class Unary:
    op: str  # 'neg' | 'abs'
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # 'add' 'sub' 'mul' 'div' 'min' 'max' 'pow'
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Builtin:
    name: str  # 'dot' | 'dist2'
    left: str  # 'x' | 'y'
    right: str


@dataclass(frozen=True)
class Compare:
    op: str  # 'lt' | 'le'
    left: "Expr"
    right: "Expr"


Expr = Union[Const, Coord, Unary, Binary, Builtin, Compare]

_INFIX = {"add": "+", "sub": "-", "mul": "*", "div": "/"}
_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2}
_CALL_ARITY = {"min": 2, "max": 2, "pow": 2, "lt": 2, "le": 2, "abs": 1, "dot": 2, "dist2": 2}


# Lexer

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/()\[\],]))"
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # 'num' 'ident' 'op' 'end'
    text: str
    offset: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise KernelSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(_Tok("end", "", len(text.encode("utf-8"))))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def _offset(self, tok: _Tok) -> int:
        # byte offset, robust to non-ASCII input
        if tok.kind == "end":
            return tok.offset
        return len(self.text[: tok.offset].encode("utf-8"))

    def fail(self, expected: Sequence[str]):
        tok = self.tok
        what = "end of input" if tok.kind == "end" else f"{tok.text!r}"
        raise KernelSyntaxError(f"unexpected {what}", self._offset(tok), expected)

    def expect(self, text: str):
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
        else:
            self.fail([text])

    def at(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            self.fail(["+", "-", "*", "/", "end of input"])
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.at("+") or self.at("-"):
            op = "add" if self.tok.text == "+" else "sub"
            self.i += 1
            e = Binary(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.at("*") or self.at("/"):
            op = "mul" if self.tok.text == "*" else "div"
            self.i += 1
            e = Binary(op, e, self.factor())
        return e

    def factor(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            value = float(tok.text)
            if not math.isfinite(value):
                raise KernelSyntaxError(f"numeric literal {tok.text!r} overflows", self._offset(tok))
            self.i += 1
            return Const(value)
        if self.at("-"):
            self.i += 1
            return Unary("neg", self.factor())
        if self.at("("):
            self.i += 1
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "ident":
            if tok.text in ("x", "y"):
                self.i += 1
                self.expect("[")
                if self.tok.kind != "num" or not self.tok.text.isdigit():
                    self.fail(["INT"])
                index = int(self.tok.text)
                self.i += 1
                self.expect("]")
                return Coord(tok.text, index)
            if tok.text in _CALL_ARITY:
                return self.call()
            raise KernelSyntaxError(f"unknown identifier {tok.text!r}", self._offset(tok),
                                    ["x", "y", *sorted(_CALL_ARITY)])
        self.fail(["NUMBER", "x", "y", "(", "-", "IDENT"])

    def vector_arg(self) -> str:
        tok = self.tok
        if tok.kind == "ident" and tok.text in ("x", "y"):
            self.i += 1
            return tok.text
        self.fail(["x", "y"])

    def call(self) -> Expr:
        name = self.tok.text
        self.i += 1
        self.expect("(")
        arity = _CALL_ARITY[name]
        args = []
        for k in range(arity):
            if k:
                self.expect(",")
            args.append(self.vector_arg() if name in ("dot", "dist2") else self.expr())
        self.expect(")")
        if name == "abs":
            return Unary("abs", args[0])
        if name in ("dot", "dist2"):
            return Builtin(name, args[0], args[1])
        if name in ("lt", "le"):
            return Compare(name, args[0], args[1])
        return Binary(name, args[0], args[1])


def parse(text: str) -> Expr:
    """Parse kernel text into an AST; raises :class:`KernelSyntaxError`."""
    return _Parser(text).parse()


# Printing

def _fmt_number(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def to_text(e: Expr) -> str:
    """Canonical text; ``parse(to_text(e))`` reproduces ``e``."""
    if isinstance(e, Const):
        s = _fmt_number(abs(e.value))
        return f"(-{s})" if math.copysign(1.0, e.value) < 0 else s
    if isinstance(e, Coord):
        return f"{e.side}[{e.index}]"
    if isinstance(e, Unary):
        if e.op == "abs":
            return f"abs({to_text(e.operand)})"
        inner = to_text(e.operand)
        if isinstance(e.operand, (Binary, Unary)) and not _is_call(e.operand):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Binary):
        if e.op in _INFIX:
            p = _PREC[e.op]
            left, right = to_text(e.left), to_text(e.right)
            if _prec(e.left) < p:
                left = f"({left})"
            if _prec(e.right) <= p:
                right = f"({right})"
            return f"{left} {_INFIX[e.op]} {right}"
        return f"{e.op}({to_text(e.left)}, {to_text(e.right)})"
    if isinstance(e, Builtin):
        return f"{e.name}({e.left}, {e.right})"
    if isinstance(e, Compare):
        return f"{e.op}({to_text(e.left)}, {to_text(e.right)})"
    raise TypeError(f"not a kernel expression: {e!r}")


def _is_call(e: Expr) -> bool:
    return (isinstance(e, Unary) and e.op == "abs") or (isinstance(e, Binary) and e.op not in _INFIX)


def _prec(e: Expr) -> int:
    if isinstance(e, Binary) and e.op in _INFIX:
        return _PREC[e.op]
    return 3


def dimension_needed(e: Expr) -> dict[str, int]:
    """Minimum vector length required on each side (0 if the side is unused)."""
    need = {"x": 0, "y": 0}

    def walk(node):
        if isinstance(node, Coord):
            need[node.side] = max(need[node.side], node.index + 1)
        elif isinstance(node, Unary):
            walk(node.operand)
        elif isinstance(node, (Binary, Compare)):
            walk(node.left)
            walk(node.right)

    walk(e)
    return need


# Evaluation

def _raw(e: Expr, env: dict[str, Sequence[float]]) -> float:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Coord):
        vec = env[e.side]
        if e.index >= len(vec):
            raise KernelDimensionError(
                f"{e.side}[{e.index}] used but {e.side} has dimension {len(vec)}"
            )
        return float(vec[e.index])
    if isinstance(e, Unary):
        v = _raw(e.operand, env)
        return -v if e.op == "neg" else abs(v)
    if isinstance(e, Compare):
        a = _raw(e.left, env)
        b = _raw(e.right, env)
        return float(a < b) if e.op == "lt" else float(a <= b)
    if isinstance(e, Builtin):
        u, v = env[e.left], env[e.right]
        if len(u) != len(v):
            raise KernelDimensionError(f"{e.name}: dimensions {len(u)} and {len(v)} differ")
        acc = 0.0
        if e.name == "dot":
            for p, q in zip(u, v):
                acc += float(p) * float(q)
        else:
            for p, q in zip(u, v):
                d = float(p) - float(q)
                acc += d * d
        return acc
    a = _raw(e.left, env)
    b = _raw(e.right, env)
    op = e.op
    if op == "add":
        r = a + b
    elif op == "sub":
        r = a - b
    elif op == "mul":
        r = a * b
    elif op == "div":
        if b == 0.0:
            raise KernelEvalError("division by zero")
        r = a / b
    elif op == "min":
        r = min(a, b)
    elif op == "max":
        r = max(a, b)
    else:
        try:
            r = a ** b
        except ZeroDivisionError:
            raise KernelEvalError("division by zero in pow") from None
        except OverflowError:
            raise KernelEvalError("overflow in pow") from None
        if isinstance(r, complex):
            raise KernelEvalError(f"pow({a!r}, {b!r}) is not real")
    if not math.isfinite(r):
        raise KernelEvalError(f"non-finite intermediate value in {op}")
    return r


def evaluate(e: Expr, x: Sequence[float], y: Sequence[float]) -> float:
    """Value of the kernel at ``(x, y)``, clamped to ``[0, 1]``."""
    r = _raw(e, {"x": x, "y": y})
    if math.isnan(r):
        raise KernelEvalError("kernel evaluated to NaN")
    return min(1.0, max(0.0, r))


# Point sets and sampling

def as_points(points) -> np.ndarray:
    """Coerce to a 2-d float array of shape ``(count, dimension)``."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[1] < 1:
        raise ValueError(f"points must be a list of vectors, got shape {arr.shape}")
    return arr


def load_points(path: str | Path) -> np.ndarray:
    """Read a point file: one point per line, comma separated, no header."""
    rows = []
    width = None
    text = Path(path).read_text(encoding="utf-8").replace("\r\n", "\n")
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        cells = line.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise TableParseError(f"expected {width} coordinates, found {len(cells)}", lineno, 1)
        row = []
        for k, c in enumerate(cells, start=1):
            try:
                v = float(c)
            except ValueError:
                raise TableParseError(f"expected a number, got {c.strip()!r}", lineno, k) from None
            if not math.isfinite(v):
                raise TableParseError(f"non-finite coordinate {c.strip()!r}", lineno, k)
            row.append(v)
        rows.append(row)
    if not rows:
        raise TableParseError("no points", 1, 1)
    return np.array(rows)


def _check_dims(e: Expr, xs: np.ndarray, ys: np.ndarray):
    need = dimension_needed(e)
    for side, pts in (("x", xs), ("y", ys)):
        if need[side] > pts.shape[1]:
            raise KernelDimensionError(
                f"kernel uses {side}[{need[side] - 1}] but {side}-points have dimension {pts.shape[1]}"
            )


def sample_grid(e: Expr, xs, ys) -> np.ndarray:
    """Matrix of clamped kernel values ``[eval(e, xs[i], ys[j])]``."""
    xs, ys = as_points(xs), as_points(ys)
    _check_dims(e, xs, ys)
    xl = [list(map(float, p)) for p in xs]
    yl = [list(map(float, p)) for p in ys]
    out = np.empty((len(xl), len(yl)))
    for i, x in enumerate(xl):
        for j, y in enumerate(yl):
            out[i, j] = evaluate(e, x, y)
    return out


def sample_table(e: Expr, xs, ys) -> FormulaTable:
    vals = sample_grid(e, xs, ys)
    return FormulaTable(vals, [f"x{i}" for i in range(vals.shape[0])],
                        [f"y{j}" for j in range(vals.shape[1])])
