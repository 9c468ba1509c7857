"""JSON model files.

See ``docs/format.md`` for the layout. ``model_to_dict`` always emits nodes in
declaration order with the value node last, decision parents in declaration
order, and table parents in table order, so ``loads(dumps(m))`` reproduces
``m`` exactly.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .errors import CyclicGraph, InvalidGraph, InvalidModel, ModelParseError, NodeNotFound
from .graph_core import Dag, NodeKind
from .model import CeTable, Cpt, InfluenceDiagram, Violation
from .utility import curve_from_dict

FORMAT_VERSION = 1

_KINDS = {"chance": NodeKind.CHANCE, "decision": NodeKind.DECISION, "deterministic": NodeKind.DETERMINISTIC}


def _require(obj: dict, key: str, where: str, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise ModelParseError(f"missing field {key!r}", where)
    value = obj[key]
    if kind is not None and not isinstance(value, kind):
        raise ModelParseError(f"field {key!r} has the wrong type", where)
    return value


def model_from_dict(data: Any) -> InfluenceDiagram:
    """Build a diagram from a parsed JSON document.

    Raises:
        ModelParseError: the document does not follow the format.
        InvalidModel: the graph is malformed (unknown parent, cycle, duplicate id).
    """
    if not isinstance(data, dict):
        raise ModelParseError("top level must be an object", "$")
    raw_nodes = _require(data, "nodes", "$", list)
    value = _require(data, "value", "$", dict)

    nodes, edges, domains, cpts = [], [], {}, {}
    for i, entry in enumerate(raw_nodes):
        where = f"$.nodes[{i}]"
        node_id = _require(entry, "id", where, str)
        kind_name = _require(entry, "kind", where, str)
        if kind_name not in _KINDS:
            raise ModelParseError(f"unknown node kind {kind_name!r}", where)
        kind = _KINDS[kind_name]
        domain = _require(entry, "domain", where, list)
        if not all(isinstance(s, str) for s in domain):
            raise ModelParseError("domain labels must be strings", where)
        parents = entry.get("parents", [])
        if not isinstance(parents, list) or not all(isinstance(p, str) for p in parents):
            raise ModelParseError("parents must be a list of node ids", where)
        nodes.append((node_id, kind))
        domains[node_id] = tuple(domain)
        edges.extend((p, node_id) for p in parents)
        if kind is NodeKind.DECISION:
            if "cpt" in entry:
                raise ModelParseError("decision nodes take no cpt", where)
            continue
        table = _require(entry, "cpt", where, list)
        try:
            cpts[node_id] = Cpt(node_id, tuple(parents), table if table else [[]])
        except (ValueError, TypeError) as exc:
            raise ModelParseError(f"cpt must be a rectangular list of number rows ({exc})", where) from None

    value_id = value.get("id", "V")
    if not isinstance(value_id, str):
        raise ModelParseError("value id must be a string", "$.value")
    v_parents = _require(value, "parents", "$.value", list)
    ce = _require(value, "ce", "$.value", list)
    try:
        ce_table = CeTable(tuple(v_parents), ce)
    except (ValueError, TypeError) as exc:
        raise ModelParseError(f"ce must be a flat list of numbers ({exc})", "$.value") from None
    nodes.append((value_id, NodeKind.VALUE))
    edges.extend((p, value_id) for p in v_parents)

    curve_spec = data.get("utility_curve", {"type": "linear"})
    try:
        curve = curve_from_dict(curve_spec)
    except (ValueError, KeyError, TypeError) as exc:
        raise ModelParseError(f"bad utility curve: {exc}", "$.utility_curve") from None

    costs = data.get("costs", {})
    if not isinstance(costs, dict) or not all(isinstance(c, (int, float)) for c in costs.values()):
        raise ModelParseError("costs must map node ids to numbers", "$.costs")

    try:
        dag = Dag(nodes, edges)
    except (CyclicGraph, NodeNotFound, InvalidGraph) as exc:
        raise InvalidModel([Violation("StructureViolation", "graph", str(exc))]) from None
    return InfluenceDiagram(dag, domains, cpts, ce_table, curve, costs)


def model_to_dict(m: InfluenceDiagram) -> dict:
    nodes = []
    for n in m.dag.nodes:
        kind = m.dag.kind(n)
        if kind is NodeKind.VALUE:
            continue
        entry: dict[str, Any] = {"id": n, "kind": kind.value, "domain": list(m.domains[n])}
        if kind is NodeKind.DECISION:
            entry["parents"] = list(m.dag.parents(n))
        else:
            cpt = m.cpts[n]
            entry["parents"] = list(cpt.parent_order)
            entry["cpt"] = cpt.table.tolist()
        nodes.append(entry)
    doc = {
        "format_version": FORMAT_VERSION,
        "nodes": nodes,
        "value": {
            "id": m.value_node,
            "parents": list(m.value_ce.parent_order),
            "ce": m.value_ce.table.tolist(),
        },
        "utility_curve": m.curve.to_dict(),
    }
    if m.costs:
        doc["costs"] = dict(m.costs)
    return doc


def dumps(m: InfluenceDiagram) -> str:
    return json.dumps(model_to_dict(m), indent=2) + "\n"


def loads(text: str) -> InfluenceDiagram:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    return model_from_dict(data)


def load(path: str | Path) -> InfluenceDiagram:
    return loads(Path(path).read_text(encoding="utf-8"))


def save(m: InfluenceDiagram, path: str | Path) -> None:
    Path(path).write_text(dumps(m), encoding="utf-8")
