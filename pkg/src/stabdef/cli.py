"""Command-line front end.

Every subcommand emits a JSON report (see ``schemas/report-v1.json``).
Exit codes: 0 success, 1 usage, 2 input/parse/validation, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import __version__
from .definability import (
    RowTarget,
    greedy_define,
    lp_define,
    majority_define,
    target_vector,
    uniform_majority_bound,
    verify_definition,
)
from .kernel import (
    Binary, Builtin, Compare, Const, Coord, KernelDimensionError, KernelEvalError,
    KernelSyntaxError, Unary, load_points, parse, sample_table, to_text,
)
from .order import double_limit, find_ladder, ladder_index, ladder_lower_bound
from .simplex import LPError
from .table import FormulaTable, GroupFunction, TableError, format_table, from_group, load_table
from .types_space import density_character, realized_types

SCHEMA_VERSION = "1"

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class Run:
    """Accumulates digest, timings and payload for one invocation."""

    def __init__(self, argv, seed):
        self.argv = list(argv)
        self.seed = seed
        self._hash = hashlib.sha256()
        self.timings: dict[str, float] = {}

    def digest_bytes(self, label: str, data: bytes):
        self._hash.update(label.encode("utf-8") + b"\0")
        self._hash.update(hashlib.sha256(data).digest())

    def read(self, path) -> bytes:
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
        self.digest_bytes(Path(path).name, data)
        return data

    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = round(time.perf_counter() - t0, 6)

    def report(self, command: str, payload: dict) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "tool": "stabdef",
            "tool_version": __version__,
            "command": command,
            "argv": self.argv,
            "seed": self.seed,
            "input_digest": self._hash.hexdigest(),
            "payload": payload,
            "timings": self.timings,
        }


# Input helpers

def _load_table(run: Run, path) -> FormulaTable:
    run.read(path)
    return load_table(path)


def _load_points(run: Run, path):
    run.read(path)
    return load_points(path)


def _load_group(run: Run, path) -> FormulaTable:
    data = run.read(path)
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}") from None
    try:
        f = doc["f"]
        if "cayley" in doc:
            g = GroupFunction(np.asarray(doc["cayley"]), f)
        else:
            g = GroupFunction.cyclic(f)
    except (KeyError, TypeError) as exc:
        raise InputError(f"{path}: group file needs 'f' and optionally 'cayley' ({exc})") from None
    return from_group(g)


def _kernel(run: Run, text: str):
    run.digest_bytes("kernel", text.encode("utf-8"))
    return parse(text)


def _table_source(run: Run, args) -> FormulaTable:
    given = [x for x in (args.table, args.kernel, args.group) if x is not None]
    if len(given) != 1:
        raise UsageError("give exactly one table source: a CSV file, --kernel with --x/--y, or --group")
    if args.table is not None:
        return _load_table(run, args.table)
    if args.group is not None:
        return _load_group(run, args.group)
    if args.x is None or args.y is None:
        raise UsageError("--kernel needs both --x and --y point files")
    e = _kernel(run, args.kernel)
    return sample_table(e, _load_points(run, args.x), _load_points(run, args.y))


def _add_source(p):
    p.add_argument("table", nargs="?", help="CSV table file")
    p.add_argument("--kernel", help="kernel expression to sample")
    p.add_argument("--x", help="x-side point file (with --kernel)")
    p.add_argument("--y", help="y-side point file (with --kernel)")
    p.add_argument("--group", help="JSON group file {'f': [...], 'cayley': [[...]]}")


def _parse_target_json(obj, where: str):
    if isinstance(obj, dict) and set(obj) == {"row"} and isinstance(obj["row"], int):
        return RowTarget(obj["row"])
    if isinstance(obj, list) and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
        return [float(v) for v in obj]
    raise InputError(f"{where}: a target is a JSON array of numbers or {{\"row\": index}}")


def _read_target_file(run: Run, path):
    data = run.read(path)
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}") from None
    return _parse_target_json(obj, str(path))


def _parse_target_flag(text: str):
    if text.startswith("row:"):
        try:
            return RowTarget(int(text[4:]))
        except ValueError:
            raise UsageError(f"bad target {text!r}; expected row:N") from None
    raise UsageError(f"bad target {text!r}; expected row:N")


def _target_echo(target):
    return {"row": target.row} if isinstance(target, RowTarget) else list(target)


# Subcommands

def cmd_analyze(run: Run, args) -> dict:
    with run.stage("load"):
        t = _table_source(run, args)
    margin = args.margin
    if not 0 < margin <= 1:
        raise UsageError("--margin must lie in (0, 1]")
    threshold = args.exhaustive_threshold
    if threshold is None:
        threshold = 12 if (t.is_boolean and margin == 1.0) else 8
    payload = {
        "table": {"rows": t.n_rows, "cols": t.n_cols, "boolean": t.is_boolean},
    }
    with run.stage("ladder"):
        exact = min(t.shape) <= threshold
        if exact:
            idx = ladder_index(t, margin)
            witness = find_ladder(t, idx, margin) if idx else None
        else:
            witness = ladder_lower_bound(t, margin, seed=args.seed, budget=args.budget)
            idx = len(witness) if witness else 0
        payload["ladder"] = {
            "index": idx,
            "exact": exact,
            "margin": margin,
            "exhaustive_threshold": threshold,
            "budget": None if exact else args.budget,
            "witness": witness.to_dict() if witness else None,
        }
    with run.stage("types"):
        types = realized_types(t, args.type_tol)
        payload["types"] = {
            "count": len(types),
            "tolerance": args.type_tol,
            "multiplicities": [rt.multiplicity for rt in types],
            "representatives": [rt.representative for rt in types],
        }
    with run.stage("density"):
        payload["density"] = [
            {"eps": eps, **density_character(t, eps).to_dict()} for eps in args.eps
        ]
    return payload


def _define_one(t: FormulaTable, target, args) -> dict:
    rec = {"target": _target_echo(target)}
    modes = ("lp", "greedy", "majority") if args.mode == "all" else (args.mode,)
    if "lp" in modes:
        d = lp_define(t, target)
        ok, err = verify_definition(t, d, target, args.tol)
        rec["lp"] = {**d.to_dict(), "verified": ok, "verified_error": err}
    if "greedy" in modes:
        d = greedy_define(t, target, args.rounds)
        ok, err = verify_definition(t, d, target, args.tol)
        rec["greedy"] = {**d.to_dict(), "verified": ok, "verified_error": err, "rounds": args.rounds}
    if "majority" in modes:
        if not t.is_boolean:
            rec["majority"] = None
        else:
            d = majority_define(t, target, args.k_max)
            if d is None:
                rec["majority"] = None
            else:
                ok, err = verify_definition(t, d, target)
                rec["majority"] = {**d.to_dict(), "verified": ok, "verified_error": err}
    return rec


def cmd_define(run: Run, args) -> dict:
    with run.stage("load"):
        t = _table_source(run, args)
        targets = [_parse_target_flag(s) for s in args.target or ()]
        for path in args.target_file or ():
            targets.append(_read_target_file(run, path))
        if not targets:
            targets = [RowTarget(rt.representative) for rt in realized_types(t, 0.0)]
    if args.mode == "majority" and not t.is_boolean:
        raise InputError("majority mode needs a Boolean (0/1) table")
    if args.k_max < 1 or args.k_max % 2 == 0:
        raise UsageError("--k-max must be a positive odd integer")
    for target in targets:
        try:
            p = target_vector(t, target)
        except (IndexError, ValueError) as exc:
            raise InputError(f"target {_target_echo(target)}: {exc}") from None
        if args.mode == "majority" and not np.all((p == 0) | (p == 1)):
            raise InputError(f"target {_target_echo(target)} is not 0/1-valued")
    with run.stage("define"):
        with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
            records = list(pool.map(lambda tg: _define_one(t, tg, args), targets))
    return {
        "table": {"rows": t.n_rows, "cols": t.n_cols, "boolean": t.is_boolean},
        "mode": args.mode,
        "tolerance": args.tol,
        "k_max": args.k_max,
        "definitions": records,
    }


def cmd_doublelimit(run: Run, args) -> dict:
    with run.stage("load"):
        e = _kernel(run, args.kernel)
        xs = _load_points(run, args.x)
        ys = _load_points(run, args.y)
    with run.stage("limits"):
        try:
            rep = double_limit(e, xs, ys, args.window, args.tol)
        except ValueError as exc:
            if isinstance(exc, KernelDimensionError):
                raise
            raise InputError(str(exc)) from None
    return {"kernel": to_text(e), "n_x": len(xs), "n_y": len(ys), "report": rep.to_dict()}


def cmd_uniform(run: Run, args) -> dict:
    with run.stage("load"):
        manifest_path = Path(args.manifest)
        data = run.read(manifest_path)
        try:
            manifest = json.loads(data)
            entries = manifest["instances"]
        except (json.JSONDecodeError, KeyError, TypeError):
            raise InputError(f"{manifest_path}: manifest must be JSON with an 'instances' list") from None
        base = manifest_path.parent
        instances = []
        names = []
        for k, entry in enumerate(entries):
            try:
                table_path = base / entry["table"]
            except (KeyError, TypeError):
                raise InputError(f"{manifest_path}: instance {k} lacks 'table'") from None
            t = _load_table(run, table_path)
            if not t.is_boolean:
                raise InputError(f"{table_path}: uniform bounds need Boolean tables")
            raw = entry.get("targets")
            if raw is None:
                targets = [RowTarget(i) for i in range(t.n_rows)]
            else:
                targets = []
                for item in raw:
                    if isinstance(item, str):
                        targets.append(_read_target_file(run, base / item))
                    else:
                        targets.append(_parse_target_json(item, f"{manifest_path} instance {k}"))
            for target in targets:
                try:
                    p = target_vector(t, target)
                except (IndexError, ValueError) as exc:
                    raise InputError(f"{table_path}: {exc}") from None
                if not np.all((p == 0) | (p == 1)):
                    raise InputError(f"{table_path}: target {_target_echo(target)} is not 0/1-valued")
            instances.append((t, targets))
            names.append(str(entry["table"]))
    if args.k_max < 1 or args.k_max % 2 == 0:
        raise UsageError("--k-max must be a positive odd integer")
    with run.stage("uniform"):
        res = uniform_majority_bound(instances, args.k_max)
    out = {"k_max": args.k_max, "instances": names, **res.to_dict(),
           "status": "none" if res.k is None else "found"}
    if res.failing is not None:
        out["failing_instance"] = names[res.failing[0]]
    return out


def _ast(e) -> dict:
    if isinstance(e, Const):
        return {"const": e.value}
    if isinstance(e, Coord):
        return {"coord": e.side, "index": e.index}
    if isinstance(e, Unary):
        return {"op": e.op, "args": [_ast(e.operand)]}
    if isinstance(e, (Binary, Compare)):
        return {"op": e.op, "args": [_ast(e.left), _ast(e.right)]}
    if isinstance(e, Builtin):
        return {"op": e.name, "args": [e.left, e.right]}
    raise TypeError(e)


def cmd_kernel(run: Run, args) -> dict:
    e = _kernel(run, args.expr)
    payload = {"action": args.action, "canonical": to_text(e)}
    if args.action == "parse":
        payload["ast"] = _ast(e)
    elif args.action == "sample":
        if args.x is None or args.y is None:
            raise UsageError("kernel sample needs --x and --y")
        with run.stage("sample"):
            t = sample_table(e, _load_points(run, args.x), _load_points(run, args.y))
        payload["table"] = {"rows": t.n_rows, "cols": t.n_cols, "boolean": t.is_boolean,
                            "values": t.values.tolist()}
        if args.out:
            Path(args.out).write_text(format_table(t), encoding="utf-8")
            payload["written"] = str(args.out)
    return payload


def _common(suppress: bool) -> argparse.ArgumentParser:
    # subcommand copies use SUPPRESS so they never clobber flags given before the subcommand
    def dflt(v):
        return argparse.SUPPRESS if suppress else v

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=dflt(0), help="random seed (default 0)")
    common.add_argument("--jobs", type=int, default=dflt(1), help="worker threads for batch work")
    common.add_argument("--json", dest="json_out", default=dflt(None),
                        help="write the report here instead of stdout")
    common.add_argument("--quiet", action="store_true", default=dflt(False),
                        help="print nothing when --json is given")
    return common


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="stabdef", description="Order property, types and definability on finite tables.",
                parents=[_common(False)])
    p.add_argument("--version", action="version", version=f"stabdef {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    common = _common(True)

    a = sub.add_parser("analyze", parents=[common], help="ladder index, realized types, eps-nets")
    _add_source(a)
    a.add_argument("--margin", type=float, default=1.0)
    a.add_argument("--eps", type=float, nargs="+", default=[0.5])
    a.add_argument("--type-tol", type=float, default=0.0)
    a.add_argument("--exhaustive-threshold", type=int, default=None,
                   help="exact ladder search when min(rows, cols) is at most this")
    a.add_argument("--budget", type=int, default=64, help="iterations of the randomized search")

    d = sub.add_parser("define", parents=[common], help="defining predicates for targets")
    _add_source(d)
    d.add_argument("--target", action="append", help="row:N (repeatable)")
    d.add_argument("--target-file", action="append", help="JSON target file (repeatable)")
    d.add_argument("--mode", choices=["lp", "greedy", "majority", "all"], default="all")
    d.add_argument("--tol", type=float, default=1e-6)
    d.add_argument("--rounds", type=int, default=1000)
    d.add_argument("--k-max", type=int, default=5)

    dl = sub.add_parser("doublelimit", parents=[common], help="iterated double limits of a kernel")
    dl.add_argument("--kernel", required=True)
    dl.add_argument("--x", required=True)
    dl.add_argument("--y", required=True)
    dl.add_argument("--window", type=int, default=5)
    dl.add_argument("--tol", type=float, default=1e-2)

    u = sub.add_parser("uniform", parents=[common], help="one majority size for a family")
    u.add_argument("manifest")
    u.add_argument("--k-max", type=int, default=5)

    k = sub.add_parser("kernel", parents=[common], help="parse, print or sample a kernel")
    k.add_argument("action", choices=["parse", "print", "sample"])
    k.add_argument("expr")
    k.add_argument("--x")
    k.add_argument("--y")
    k.add_argument("--out", help="CSV file for the sampled table")
    return p


COMMANDS = {
    "analyze": cmd_analyze,
    "define": cmd_define,
    "doublelimit": cmd_doublelimit,
    "uniform": cmd_uniform,
    "kernel": cmd_kernel,
}


def load_schema() -> dict:
    """The JSON schema every report validates against."""
    from importlib.resources import files

    return json.loads(files("stabdef").joinpath("schemas/report-v1.json").read_text("utf-8"))


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    if args.jobs < 1:
        print("stabdef: error: --jobs must be positive", file=sys.stderr)
        return EXIT_USAGE
    run = Run(argv, args.seed)
    try:
        payload = COMMANDS[args.command](run, args)
        if args.command == "kernel" and args.action == "print":
            text = payload["canonical"] + "\n"
        else:
            text = dumps(run.report(args.command, payload))
    except UsageError as exc:
        print(f"stabdef: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InputError, TableError, KernelSyntaxError, KernelDimensionError, FileNotFoundError,
            IndexError) as exc:
        print(f"stabdef: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"stabdef: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (KernelEvalError, LPError, ArithmeticError) as exc:
        print(f"stabdef: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.json_out:
        Path(args.json_out).write_text(text, encoding="utf-8")
        if not args.quiet:
            print(f"report written to {args.json_out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
