"""Command-line interface.

Exit codes: 0 ok, 1 usage or query error, 2 invalid model, 3 parse error,
4 non-canonical query, 5 model too large, 6 unsupported reformulation,
7 consistency violations found by ``check``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .consistency import run_check
from .errors import (
    InfoValueError,
    InvalidModel,
    ModelParseError,
    ModelTooLarge,
    NonCanonicalQuery,
    UnsupportedReformulation,
)
from .fileformat import dumps, load
from .generate import random_diagram
from .model import canonicalize, is_canonical, validate
from .ordering import OrderingGraph, build_ordering, nevpi_refine
from .solver import evpi
from .utility import Exponential

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2
EXIT_PARSE = 3
EXIT_NON_CANONICAL = 4
EXIT_TOO_LARGE = 5
EXIT_UNSUPPORTED = 6
EXIT_VIOLATIONS = 7

SCHEMA_VERSION = 1


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors, which would collide with "invalid model"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _split(text: str | None) -> list[str]:
    if not text:
        return []
    return [t.strip() for t in text.split(",") if t.strip()]


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        payload = {"schema_version": SCHEMA_VERSION, "command": args.command, **payload}
        print(json.dumps(payload, indent=2))
    elif not args.quiet:
        print(text)


def _load_valid(path):
    m = load(path)
    problems = validate(m)
    if problems:
        raise InvalidModel(problems)
    return m


# -- DOT ------------------------------------------------------------------

def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def ordering_to_dot(g: OrderingGraph) -> str:
    """Graphviz source for an ordering graph; arc X -> Y reads EVPI(X) >= EVPI(Y)."""
    lines = [
        "digraph evpi_ordering {",
        f"  label={_quote(f'EVPI ordering for decision {g.decision}')};",
        "  node [shape=ellipse];",
    ]
    for n in g.nodes:
        if n in g.zero_set:
            label = _quote(n)[:-1] + '\\nEVPI=0"'
            lines.append(f"  {_quote(n)} [label={label}, style=dashed];")
        else:
            lines.append(f"  {_quote(n)};")
    classes = {n: i for i, group in enumerate(g.equivalence_classes()) for n in group}
    done = set()
    for e in g.edges:
        same = e.tail in classes and classes.get(e.tail) == classes.get(e.head)
        if same:
            pair = frozenset((e.tail, e.head))
            if pair in done:
                continue
            done.add(pair)
            lines.append(f"  {_quote(e.tail)} -> {_quote(e.head)} [dir=both];")
        else:
            lines.append(f"  {_quote(e.tail)} -> {_quote(e.head)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- commands -------------------------------------------------------------

def cmd_validate(args) -> int:
    m = load(args.model)
    problems = validate(m)
    payload = {"valid": not problems, "violations": [vars(p) for p in problems]}
    text = "valid" if not problems else "\n".join(str(p) for p in problems)
    _emit(args, payload, text)
    return EXIT_OK if not problems else EXIT_INVALID


def cmd_dsep(args) -> int:
    m = load(args.model)
    xs, ys, zs = _split(args.x), _split(args.y), _split(args.given)
    sep = m.dag.d_separated(xs, ys, zs)
    verdict = "d-separated" if sep else "d-connected"
    _emit(args, {"x": xs, "y": ys, "given": zs, "d_separated": sep, "verdict": verdict}, verdict)
    return EXIT_OK


def _cost_map(text: str | None, m) -> dict[str, float] | None:
    if text is None:
        return None
    if text == "model":
        return dict(m.costs)
    out = {}
    for item in _split(text):
        name, _, value = item.partition("=")
        out[name.strip()] = float(value)
    return out


def cmd_evpi(args) -> int:
    m = _load_valid(args.model)
    chance = _split(args.chance)
    report = evpi(m, args.decision, chance, method=args.method)
    payload = report.to_dict()
    rows = [
        ("decision", report.decision),
        ("observe", ",".join(report.observed)),
        ("EVPI", f"{report.value:.12g}"),
        ("method", report.method.value),
        ("residual", f"{report.residual:.3g}"),
        ("iterations", str(report.iterations)),
        ("ce with / without", f"{report.ce_with:.12g} / {report.ce_without:.12g}"),
    ]
    if args.cost is not None:
        if args.cost == "model":
            cost = sum(m.cost(x) for x in report.observed)
        else:
            cost = float(args.cost)
        payload["cost"] = cost
        payload["nevpi"] = report.value - cost
        rows.append(("NEVPI", f"{report.value - cost:.12g}"))
    _emit(args, payload, "\n".join(f"{k:<18} {v}" for k, v in rows))
    return EXIT_OK


def cmd_order(args) -> int:
    m = _load_valid(args.model)
    g = build_ordering(m, args.decision)
    payload = {
        "decision": g.decision,
        "nodes": list(g.nodes),
        "zero_set": [n for n in g.nodes if n in g.zero_set],
        "edges": [
            {"tail": e.tail, "head": e.head, "rule": e.rule, "via": e.via, "premise": e.premise}
            for e in g.edges
        ],
        "equivalence_classes": [list(c) for c in g.equivalence_classes()],
        "reformulation": [
            {"original": r.original, "mapping_node": r.mapping_node, "deterministic_node": r.deterministic_node}
            for r in g.reformulation
        ],
    }
    lines = [f"EVPI ordering for decision {g.decision}"]
    for r in g.reformulation:
        lines.append(f"reformulated: {r.original} -> deterministic, mapping variable {r.mapping_node}")
    lines.append("zero EVPI: " + (", ".join(payload["zero_set"]) or "(none)"))
    for e in g.edges:
        lines.append(f"EVPI({e.tail}) >= EVPI({e.head})   [{e.rule}; {e.premise}]")
    if not g.edges:
        lines.append("no dominance edges")

    costs = _cost_map(args.costs, m)
    if costs is not None:
        refined = nevpi_refine(g, costs)
        payload["strict_nevpi"] = [list(p) for p in refined.strict]
        payload["equal_cost"] = [list(p) for p in refined.equal_cost]
        for x, y in refined.strict:
            lines.append(f"NEVPI({x}) > NEVPI({y})")

    if args.dot:
        Path(args.dot).write_text(ordering_to_dot(g), encoding="utf-8")
        payload["dot"] = str(args.dot)
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_canonical(args) -> int:
    m = _load_valid(args.model)
    already = is_canonical(m, args.decision)
    out, records = canonicalize(m, args.decision)
    payload = {
        "canonical": already,
        "reformulation": [
            {"original": r.original, "mapping_node": r.mapping_node, "states": len(r.functions)} for r in records
        ],
    }
    lines = [f"canonical: {'true' if already else 'false'}"]
    for r in records:
        lines.append(f"converted {r.original} to a deterministic node; mapping variable {r.mapping_node} "
                     f"with {len(r.functions)} states")
    if args.emit:
        Path(args.emit).write_text(dumps(out), encoding="utf-8")
        payload["emitted"] = str(args.emit)
        lines.append(f"wrote {args.emit}")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_gen(args) -> int:
    curve = Exponential(args.risk_tolerance) if args.risk_tolerance else None
    m = random_diagram(
        args.seed,
        n_chance=args.chance,
        n_decisions=args.decisions,
        n_actions=args.actions,
        n_states=args.states,
        curve=curve,
    )
    sys.stdout.write(dumps(m))
    return EXIT_OK


def cmd_check(args) -> int:
    report = run_check(args.trials, args.seed, args.max_chance)
    text = (
        f"trials {report.trials}, models {report.models_generated}, edges checked {report.edges_checked}, "
        f"zero-set nodes checked {report.zero_set_checked}, "
        f"violations {len(report.violations)}, zero-set violations {len(report.zero_violations)}"
    )
    for v in report.violations:
        text += f"\n  edge {v['edge'][0]}->{v['edge'][1]} seed {v['seed']}: {v['evpi_x']} < {v['evpi_y']}"
    for v in report.zero_violations:
        text += f"\n  zero-set {v['node']} seed {v['seed']}: EVPI {v['evpi']}"
    _emit(args, report.to_dict(), text)
    return EXIT_OK if report.ok else EXIT_VIOLATIONS


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="machine-readable output")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS, help="suppress text output")

    p = _Parser(prog="infovalue", description="EVPI analysis for discrete influence diagrams.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--quiet", action="store_true", help="suppress text output")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("validate", parents=[common], help="check a model file")
    s.add_argument("model")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("dsep", parents=[common], help="d-separation query")
    s.add_argument("model")
    s.add_argument("--x", required=True, help="comma-separated node ids")
    s.add_argument("--y", required=True, help="comma-separated node ids")
    s.add_argument("--given", default="", help="comma-separated conditioning nodes")
    s.set_defaults(func=cmd_dsep)

    s = sub.add_parser("evpi", parents=[common], help="numeric EVPI / NEVPI")
    s.add_argument("model")
    s.add_argument("--decision", required=True)
    s.add_argument("--chance", required=True, help="node, or comma-separated set for joint EVPI")
    s.add_argument("--cost", nargs="?", const="model", default=None,
                   help="report NEVPI; bare flag uses the model's costs, or give a number")
    s.add_argument("--method", choices=["closed-form", "bisection"], default=None)
    s.set_defaults(func=cmd_evpi)

    s = sub.add_parser("order", parents=[common], help="qualitative EVPI ordering")
    s.add_argument("model")
    s.add_argument("--decision", required=True)
    s.add_argument("--dot", help="write Graphviz source to this path")
    s.add_argument("--costs", nargs="?", const="model", default=None,
                   help="NEVPI refinement; bare flag uses the model's costs, or X1=2,X2=3")
    s.set_defaults(func=cmd_order)

    s = sub.add_parser("canonical", parents=[common], help="canonical form w.r.t. a decision")
    s.add_argument("model")
    s.add_argument("--decision", required=True)
    s.add_argument("--emit", help="write the reformulated model here")
    s.set_defaults(func=cmd_canonical)

    s = sub.add_parser("gen", parents=[common], help="random canonical model to stdout")
    s.add_argument("--chance", type=int, default=4)
    s.add_argument("--decisions", type=int, default=1)
    s.add_argument("--actions", type=int, default=2)
    s.add_argument("--states", type=int, default=2)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--risk-tolerance", type=float, default=None, help="use an exponential curve")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("check", parents=[common], help="ordering vs numeric EVPI on random models")
    s.add_argument("--trials", type=int, default=200)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-chance", type=int, default=6)
    s.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors, --help, --version
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ModelParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InvalidModel as exc:
        if args.json:
            print(json.dumps({"schema_version": SCHEMA_VERSION, "command": args.command, "valid": False,
                              "violations": [vars(v) for v in exc.violations]}, indent=2))
        else:
            for v in exc.violations:
                print(v, file=sys.stderr)
        return EXIT_INVALID
    except NonCanonicalQuery as exc:
        print(f"non-canonical query: {exc}", file=sys.stderr)
        return EXIT_NON_CANONICAL
    except ModelTooLarge as exc:
        print(f"model too large: {exc}", file=sys.stderr)
        return EXIT_TOO_LARGE
    except UnsupportedReformulation as exc:
        print(f"unsupported reformulation: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (InfoValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
