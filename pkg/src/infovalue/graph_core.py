"""Immutable DAG substrate: structural queries and d-separation."""

from __future__ import annotations

import enum
import heapq
from collections import deque
from typing import Iterable

from .errors import CyclicGraph, InvalidGraph, InvalidQuery, NodeNotFound

NodeId = str


class NodeKind(enum.Enum):
    CHANCE = "chance"
    DECISION = "decision"
    VALUE = "value"
    DETERMINISTIC = "deterministic"


def topological_order(nodes: Iterable[NodeId], edges: Iterable[tuple[NodeId, NodeId]]) -> list[NodeId]:
    """Kahn's algorithm, ties broken by position in ``nodes``.

    Raises:
        CyclicGraph: with one offending cycle in ``.cycle``.
    """
    nodes = list(nodes)
    rank = {n: i for i, n in enumerate(nodes)}
    children: dict[NodeId, list[NodeId]] = {n: [] for n in nodes}
    indegree = dict.fromkeys(nodes, 0)
    for u, v in edges:
        children[u].append(v)
        indegree[v] += 1

    ready = [rank[n] for n in nodes if indegree[n] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        n = nodes[heapq.heappop(ready)]
        order.append(n)
        for c in children[n]:
            indegree[c] -= 1
            if indegree[c] == 0:
                heapq.heappush(ready, rank[c])

    if len(order) < len(nodes):
        raise CyclicGraph(_find_cycle(nodes, _parent_lists(children), indegree))
    return order


def _parent_lists(children):
    parents: dict[NodeId, list[NodeId]] = {n: [] for n in children}
    for u, cs in children.items():
        for v in cs:
            parents[v].append(u)
    return parents


def _find_cycle(nodes, parents, indegree):
    # nodes left over by Kahn's algorithm each keep a leftover parent,
    # so walking parent links inside that set must revisit a node
    left = {n for n in nodes if indegree[n] > 0}
    node = next(n for n in nodes if n in left)
    path, pos = [], {}
    while node not in pos:
        pos[node] = len(path)
        path.append(node)
        node = next(p for p in parents[node] if p in left)
    cycle = path[pos[node]:] + [node]
    return cycle[::-1]


class Dag:
    """A typed directed acyclic graph.

    Nodes keep their declaration order, which is used for every tie-break.
    Instances are never mutated after construction.
    """

    __slots__ = ("_nodes", "_kind", "_rank", "_edges", "_children", "_parents", "_topo")

    def __init__(self, nodes: Iterable[tuple[NodeId, NodeKind]], edges: Iterable[tuple[NodeId, NodeId]]):
        node_list = []
        kind = {}
        for node_id, node_kind in nodes:
            if not isinstance(node_id, str) or not node_id:
                raise InvalidGraph(f"node ids must be non-empty strings, got {node_id!r}")
            if node_id in kind:
                raise InvalidGraph(f"duplicate node {node_id!r}")
            kind[node_id] = NodeKind(node_kind)
            node_list.append(node_id)

        edge_list = []
        seen = set()
        for u, v in edges:
            for end in (u, v):
                if end not in kind:
                    raise NodeNotFound(end)
            if u == v:
                raise CyclicGraph([u, u])
            if (u, v) in seen:
                raise InvalidGraph(f"duplicate edge {u!r} -> {v!r}")
            seen.add((u, v))
            edge_list.append((u, v))

        self._nodes = tuple(node_list)
        self._kind = kind
        self._rank = {n: i for i, n in enumerate(node_list)}
        self._edges = frozenset(edge_list)
        children = {n: [] for n in node_list}
        parents = {n: [] for n in node_list}
        for u, v in edge_list:
            children[u].append(v)
            parents[v].append(u)
        self._children = {n: tuple(sorted(c, key=self._rank.__getitem__)) for n, c in children.items()}
        self._parents = {n: tuple(sorted(p, key=self._rank.__getitem__)) for n, p in parents.items()}
        self._topo = tuple(topological_order(node_list, edge_list))

    # -- basic accessors -------------------------------------------------

    @property
    def nodes(self) -> tuple[NodeId, ...]:
        return self._nodes

    @property
    def edges(self) -> frozenset[tuple[NodeId, NodeId]]:
        return self._edges

    def kind(self, x: NodeId) -> NodeKind:
        self._check(x)
        return self._kind[x]

    def nodes_of_kind(self, kind: NodeKind) -> tuple[NodeId, ...]:
        return tuple(n for n in self._nodes if self._kind[n] is kind)

    def rank(self, x: NodeId) -> int:
        self._check(x)
        return self._rank[x]

    def __contains__(self, x) -> bool:
        return x in self._kind

    def __len__(self) -> int:
        return len(self._nodes)

    def __repr__(self) -> str:
        return f"Dag(nodes={list(self._nodes)!r}, edges={sorted(self._edges)!r})"

    def _check(self, x):
        if x not in self._kind:
            raise NodeNotFound(x)

    # -- structural queries ----------------------------------------------

    def successors(self, x: NodeId) -> frozenset[NodeId]:
        self._check(x)
        return frozenset(self._children[x])

    def predecessors(self, x: NodeId) -> frozenset[NodeId]:
        self._check(x)
        return frozenset(self._parents[x])

    def children(self, x: NodeId) -> tuple[NodeId, ...]:
        """Direct successors in declaration order."""
        self._check(x)
        return self._children[x]

    def parents(self, x: NodeId) -> tuple[NodeId, ...]:
        """Direct predecessors in declaration order."""
        self._check(x)
        return self._parents[x]

    def descendants(self, x: NodeId) -> frozenset[NodeId]:
        self._check(x)
        return frozenset(self._walk([x], self._children))

    def ancestors(self, x: NodeId) -> frozenset[NodeId]:
        self._check(x)
        return frozenset(self._walk([x], self._parents))

    @staticmethod
    def _walk(start, step):
        found = set()
        queue = deque(start)
        while queue:
            n = queue.popleft()
            for m in step[n]:
                if m not in found:
                    found.add(m)
                    queue.append(m)
        return found

    def topological_order(self) -> list[NodeId]:
        return list(self._topo)

    # -- d-separation ----------------------------------------------------

    def d_separated(self, xs: Iterable[NodeId], ys: Iterable[NodeId], zs: Iterable[NodeId] = ()) -> bool:
        """True iff every path between ``xs`` and ``ys`` is blocked by ``zs``.

        Active-trail search over (node, direction) states. ``up`` means the
        trail arrived from a child, ``down`` from a parent. A collider passes
        the trail only if it is in ``zs`` or has a descendant there, which is
        the same as being in the ancestral closure of ``zs``.
        """
        xs, ys, zs = set(xs), set(ys), set(zs)
        for n in xs | ys | zs:
            self._check(n)
        if xs & ys or xs & zs or ys & zs:
            raise InvalidQuery("d-separation query sets must be pairwise disjoint")
        if not xs or not ys:
            return True

        z_closure = set(zs) | self._walk(zs, self._parents)
        visited = set()
        queue = deque((x, "up") for x in xs)
        while queue:
            node, direction = queue.popleft()
            if (node, direction) in visited:
                continue
            visited.add((node, direction))
            if node not in zs and node in ys:
                return False
            if direction == "up" and node not in zs:
                queue.extend((p, "up") for p in self._parents[node])
                queue.extend((c, "down") for c in self._children[node])
            elif direction == "down":
                if node not in zs:
                    queue.extend((c, "down") for c in self._children[node])
                if node in z_closure:
                    queue.extend((p, "up") for p in self._parents[node])
        return True

    # -- derived graphs --------------------------------------------------

    def with_edges(self, added=(), removed=()) -> "Dag":
        removed = set(removed)
        edges = [e for e in self._sorted_edges() if e not in removed]
        edges.extend(e for e in added if e not in self._edges)
        return Dag(((n, self._kind[n]) for n in self._nodes), edges)

    def _sorted_edges(self):
        return sorted(self._edges, key=lambda e: (self._rank[e[1]], self._rank[e[0]]))


def d_separated(g: Dag, xs, ys, zs=()) -> bool:
    return g.d_separated(xs, ys, zs)
