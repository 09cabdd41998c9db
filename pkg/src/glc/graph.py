"""The GRAPH data model: five gate kinds, directed edges, leaves and loops.

A graph is an assembly of trivalent/univalent gates whose every port is the
endpoint of exactly one edge; open ends are completed with named input and
output leaves. A lone InputLeaf→OutputLeaf edge is a wire; loops carry no
endpoints at all. The listed port order of each kind is its fixed cyclic
(locally planar) order — no embedding data is stored.

Graphs are immutable snapshots after ``build``: every query here is
read-only, and the move engine produces new snapshots via patches.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .coeff import Coefficient

LAMBDA = "lambda"
APP = "app"
FANOUT = "fanout"
DILATION = "dilation"
TERMINATION = "term"

# Port schemas, in cyclic order. Directions: λ's left exit carries the
# variable (var_out), the right exit the abstraction (term_out); the
# dilation's first input is x_in, as in x ∘_ε y.
PORT_SCHEMA: dict[str, tuple[tuple[str, str], ...]] = {
    LAMBDA: (("in", "in"), ("var_out", "out"), ("term_out", "out")),
    APP: (("fun_in", "in"), ("arg_in", "in"), ("out", "out")),
    FANOUT: (("in", "in"), ("left_out", "out"), ("right_out", "out")),
    DILATION: (("x_in", "in"), ("y_in", "in"), ("out", "out")),
    TERMINATION: (("in", "in"),),
}


@dataclass(frozen=True)
class GateKind:
    """A gate kind; dilations carry their coefficient as part of the kind."""

    kind: str
    coef: Coefficient | None = None

    def __post_init__(self):
        if self.kind not in PORT_SCHEMA:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if (self.kind == DILATION) != (self.coef is not None):
            raise ValueError("dilation gates carry a coefficient; others must not")

    def ports(self) -> tuple[tuple[str, str], ...]:
        return PORT_SCHEMA[self.kind]

    def in_ports(self) -> tuple[str, ...]:
        return tuple(p for p, d in PORT_SCHEMA[self.kind] if d == "in")

    def out_ports(self) -> tuple[str, ...]:
        return tuple(p for p, d in PORT_SCHEMA[self.kind] if d == "out")

    def __str__(self) -> str:
        if self.kind == DILATION:
            return f"dilation {self.coef}"
        return self.kind


LAMBDA_GATE = GateKind(LAMBDA)
APP_GATE = GateKind(APP)
FANOUT_GATE = GateKind(FANOUT)
TERMINATION_GATE = GateKind(TERMINATION)


def dilation_gate(coef: Coefficient) -> GateKind:
    return GateKind(DILATION, coef)


@dataclass(frozen=True)
class NodePort:
    node: str
    port: str

    def __str__(self) -> str:
        return f"{self.node}.{self.port}"


@dataclass(frozen=True)
class InputLeaf:
    leaf: str

    def __str__(self) -> str:
        return f"in:{self.leaf}"


@dataclass(frozen=True)
class OutputLeaf:
    leaf: str

    def __str__(self) -> str:
        return f"out:{self.leaf}"


Endpoint = NodePort | InputLeaf | OutputLeaf


@dataclass(frozen=True)
class Edge:
    source: Endpoint
    target: Endpoint

    def __str__(self) -> str:
        return f"{self.source} -> {self.target}"


class GraphError(Exception):
    """Base class for all domain errors; ``code`` is the stable CLI/service code."""

    code = "GRAPH_ERROR"


class DuplicatePort(GraphError):
    code = "DUPLICATE_PORT"


class UnknownPort(GraphError):
    code = "UNKNOWN_PORT"


class DanglingPort(GraphError):
    code = "DANGLING_PORT"


class UnknownNode(GraphError):
    code = "UNKNOWN_NODE"


class BadAnchor(GraphError):
    code = "BAD_ANCHOR"


class NotIsolated(GraphError):
    code = "NOT_ISOLATED"

    def __init__(self, message: str, boundary: list[str] | None = None):
        super().__init__(message)
        self.boundary = boundary or []


@dataclass(frozen=True)
class Violation:
    code: str
    message: str


class Graph:
    """An immutable validated graph value.

    ``nodes`` maps node id → GateKind, ``edges`` maps edge id → Edge,
    ``loops`` is the set of loop ids. Leaf ids double as display names;
    isomorphism ignores them.
    """

    __slots__ = ("nodes", "edges", "loops", "_counters", "_port_edge", "_leaf_edge")

    def __init__(
        self,
        nodes: dict[str, GateKind],
        edges: dict[str, Edge],
        loops: set[str],
        counters: dict[str, int] | None = None,
    ):
        self.nodes = dict(nodes)
        self.edges = dict(edges)
        self.loops = set(loops)
        self._counters = dict(counters or {})
        self._port_edge: dict[tuple[str, str], str] = {}
        self._leaf_edge: dict[tuple[str, str], str] = {}
        for eid, edge in self.edges.items():
            for end in (edge.source, edge.target):
                if isinstance(end, NodePort):
                    self._port_edge[(end.node, end.port)] = eid
                elif isinstance(end, InputLeaf):
                    self._leaf_edge[("in", end.leaf)] = eid
                else:
                    self._leaf_edge[("out", end.leaf)] = eid

    # -- queries ------------------------------------------------------------

    def kind_of(self, node: str) -> GateKind:
        try:
            return self.nodes[node]
        except KeyError:
            raise UnknownNode(f"unknown node {node!r}") from None

    def edge_at(self, node: str, port: str) -> str:
        """Edge id whose endpoint is the given port."""
        try:
            return self._port_edge[(node, port)]
        except KeyError:
            raise UnknownPort(f"no edge at port {node}.{port}") from None

    def feeder(self, node: str, port: str) -> Endpoint:
        """Source endpoint of the edge arriving at an input port."""
        return self.edges[self.edge_at(node, port)].source

    def consumer(self, node: str, port: str) -> Endpoint:
        """Target endpoint of the edge leaving an output port."""
        return self.edges[self.edge_at(node, port)].target

    def input_leaves(self) -> list[str]:
        return sorted(l for (d, l) in self._leaf_edge if d == "in")

    def output_leaves(self) -> list[str]:
        return sorted(l for (d, l) in self._leaf_edge if d == "out")

    def leaf_edge(self, direction: str, leaf: str) -> str:
        return self._leaf_edge[(direction, leaf)]

    def gate_kinds(self) -> set[str]:
        return {gk.kind for gk in self.nodes.values()}

    def wires(self) -> list[str]:
        return sorted(
            eid
            for eid, e in self.edges.items()
            if isinstance(e.source, InputLeaf) and isinstance(e.target, OutputLeaf)
        )

    def fresh_id(self, prefix: str) -> str:
        """A fresh id with the given prefix; does not mutate the graph."""
        n = self._counters.get(prefix, 0)
        while f"{prefix}{n}" in self.nodes or f"{prefix}{n}" in self.edges or f"{prefix}{n}" in self.loops:
            n += 1
        return f"{prefix}{n}"

    def bump(self, prefix: str, used: str) -> None:
        n = int(used[len(prefix):]) if used[len(prefix):].isdigit() else 0
        if n >= self._counters.get(prefix, 0):
            self._counters[prefix] = n + 1

    def with_delta(
        self,
        removed_nodes: dict[str, GateKind],
        removed_edges: dict[str, Edge],
        removed_loops: set[str],
        added_nodes: dict[str, GateKind],
        added_edges: dict[str, Edge],
        added_loops: set[str],
    ) -> "Graph":
        """A new snapshot with the delta applied, reusing the port index
        incrementally (apply on big graphs stays proportional to the patch)."""
        g = Graph.__new__(Graph)
        g.nodes = dict(self.nodes)
        for n in removed_nodes:
            g.nodes.pop(n, None)
        g.nodes.update(added_nodes)
        g.edges = dict(self.edges)
        for e in removed_edges:
            g.edges.pop(e, None)
        g.edges.update(added_edges)
        g.loops = (self.loops - removed_loops) | added_loops
        g._counters = dict(self._counters)
        g._port_edge = dict(self._port_edge)
        g._leaf_edge = dict(self._leaf_edge)
        for eid, edge in removed_edges.items():
            for end in (edge.source, edge.target):
                if isinstance(end, NodePort):
                    g._port_edge.pop((end.node, end.port), None)
                elif isinstance(end, InputLeaf):
                    g._leaf_edge.pop(("in", end.leaf), None)
                else:
                    g._leaf_edge.pop(("out", end.leaf), None)
        for eid, edge in added_edges.items():
            for end in (edge.source, edge.target):
                if isinstance(end, NodePort):
                    g._port_edge[(end.node, end.port)] = eid
                elif isinstance(end, InputLeaf):
                    g._leaf_edge[("in", end.leaf)] = eid
                else:
                    g._leaf_edge[("out", end.leaf)] = eid
        for used in (*added_nodes, *added_edges, *added_loops):
            stem = used.rstrip("0123456789")
            if stem and stem != used:
                g.bump(stem, used)
        return g

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.nodes == other.nodes
            and self.edges == other.edges
            and self.loops == other.loops
        )

    def __hash__(self):
        raise TypeError("Graph is not hashable; use canonical_key")

    def __repr__(self) -> str:
        return (
            f"Graph(nodes={len(self.nodes)}, edges={len(self.edges)}, "
            f"loops={len(self.loops)})"
        )

    def stats(self) -> dict[str, int]:
        return {
            "nodes": len(self.nodes),
            "edges": len(self.edges),
            "loops": len(self.loops),
        }


def _endpoint_role(end: Endpoint, nodes: dict[str, GateKind], as_source: bool) -> str | None:
    """None if the endpoint may play the role, else a violation message."""
    if isinstance(end, NodePort):
        if end.node not in nodes:
            return f"unknown node {end.node!r}"
        kind = nodes[end.node]
        dirs = dict(kind.ports())
        if end.port not in dirs:
            return f"node {end.node} ({kind.kind}) has no port {end.port!r}"
        want = "out" if as_source else "in"
        if dirs[end.port] != want:
            return f"port {end} is an {dirs[end.port]}-port, used as edge {'source' if as_source else 'target'}"
        return None
    if isinstance(end, InputLeaf):
        return None if as_source else f"input leaf {end.leaf!r} used as edge target"
    return f"output leaf {end.leaf!r} used as edge source" if as_source else None


def build(
    nodes: list[tuple[str, GateKind]] | dict[str, GateKind] | None = None,
    edges: list[tuple[Endpoint, Endpoint]] | None = None,
    loops: int = 0,
) -> Graph:
    """Construct and validate a graph.

    Every port of every node must be covered by exactly one edge endpoint:
    callers complete open ports with InputLeaf/OutputLeaf endpoints
    themselves. Raises DuplicatePort/UnknownPort/DanglingPort naming the
    offending port.
    """
    node_map = dict(nodes) if nodes else {}
    if nodes and not isinstance(nodes, dict) and len(node_map) != len(nodes):
        seen: set[str] = set()
        for nid, _ in nodes:
            if nid in seen:
                raise DuplicatePort(f"node id {nid!r} declared twice")
            seen.add(nid)
    edge_map: dict[str, Edge] = {}
    for i, (src, tgt) in enumerate(edges or []):
        for end, as_source in ((src, True), (tgt, False)):
            msg = _endpoint_role(end, node_map, as_source)
            if msg:
                if isinstance(end, NodePort) and end.node not in node_map:
                    raise UnknownPort(msg)
                if isinstance(end, NodePort) and end.port not in dict(
                    node_map[end.node].ports()
                ):
                    raise UnknownPort(msg)
                raise DanglingPort(msg)
        edge_map[f"e{i}"] = Edge(src, tgt)
    loop_set = {f"l{i}" for i in range(loops)}
    g = Graph(node_map, edge_map, loop_set, {"e": len(edge_map), "l": loops})
    problems = validate(g)
    for v in problems:
        exc = {"DUPLICATE_PORT": DuplicatePort, "DANGLING_PORT": DanglingPort}.get(
            v.code, DanglingPort
        )
        raise exc(v.message)
    return g


def validate(g: Graph) -> list[Violation]:
    """Check every graph invariant; violations are data, not exceptions."""
    out: list[Violation] = []
    port_uses: dict[tuple[str, str], int] = {}
    leaf_uses: dict[tuple[str, str], int] = {}
    for eid, edge in g.edges.items():
        for end, as_source in ((edge.source, True), (edge.target, False)):
            msg = _endpoint_role(end, g.nodes, as_source)
            if msg:
                out.append(Violation("DANGLING_PORT", f"edge {eid}: {msg}"))
                continue
            if isinstance(end, NodePort):
                port_uses[(end.node, end.port)] = port_uses.get((end.node, end.port), 0) + 1
            elif isinstance(end, InputLeaf):
                leaf_uses[("in", end.leaf)] = leaf_uses.get(("in", end.leaf), 0) + 1
            else:
                leaf_uses[("out", end.leaf)] = leaf_uses.get(("out", end.leaf), 0) + 1
    for (node, port), n in port_uses.items():
        if n > 1:
            out.append(Violation("DUPLICATE_PORT", f"port {node}.{port} used by {n} edges"))
    for (d, leaf), n in leaf_uses.items():
        if n > 1:
            out.append(Violation("DUPLICATE_PORT", f"{d}put leaf {leaf!r} used by {n} edges"))
    for nid, kind in g.nodes.items():
        for port, _ in kind.ports():
            if (nid, port) not in port_uses:
                out.append(Violation("DANGLING_PORT", f"port {nid}.{port} has no edge"))
    return out


def successors(g: Graph, node: str) -> set[str]:
    """Nodes one oriented step away (targets of edges leaving any out-port)."""
    out: set[str] = set()
    kind = g.kind_of(node)
    for port in kind.out_ports():
        tgt = g.edges[g.edge_at(node, port)].target
        if isinstance(tgt, NodePort):
            out.add(tgt.node)
    return out


def reachable(g: Graph, src: str, dst: str) -> bool:
    """True iff a directed path of one or more edges leads from src to dst.

    Flow passes through any node from any input port to any output port;
    this is the transitive closure of the one-step edge relation.
    """
    if src not in g.nodes:
        raise UnknownNode(f"unknown node {src!r}")
    if dst not in g.nodes:
        raise UnknownNode(f"unknown node {dst!r}")
    seen: set[str] = set()
    queue = deque(successors(g, src))
    while queue:
        n = queue.popleft()
        if n == dst:
            return True
        if n in seen:
            continue
        seen.add(n)
        queue.extend(successors(g, n) - seen)
    return False


def component_through(g: Graph, eid: str) -> set[str]:
    """The node set hanging off edge ``eid``, isolated from everything else.

    ``eid`` must arrive at a FanOut.in or Termination.in port; the returned
    set S contains the edge's source node, and no edge other than ``eid``
    may join S to its complement. Arrows to leaves count as external
    connections, so a component touching any leaf is not isolated.
    """
    if eid not in g.edges:
        raise BadAnchor(f"unknown edge {eid!r}")
    edge = g.edges[eid]
    tgt = edge.target
    if not isinstance(tgt, NodePort):
        raise BadAnchor(f"edge {eid} does not arrive at a gate")
    tkind = g.kind_of(tgt.node).kind
    if not (
        (tkind == FANOUT and tgt.port == "in")
        or (tkind == TERMINATION and tgt.port == "in")
    ):
        raise BadAnchor(f"edge {eid} arrives at {tgt}, not a FanOut.in or Termination.in")
    if not isinstance(edge.source, NodePort):
        raise NotIsolated(
            f"edge {eid} is fed by leaf {edge.source}, an external connection",
            boundary=[eid],
        )
    root = edge.source.node
    members = {root}
    queue = deque([root])
    boundary: list[str] = []
    while queue:
        n = queue.popleft()
        for port, _ in g.nodes[n].ports():
            e2 = g.edge_at(n, port)
            if e2 == eid:
                continue
            other = g.edges[e2].source if g.edges[e2].target == NodePort(n, port) else g.edges[e2].target
            # an edge may connect two ports of the same member node
            if isinstance(other, NodePort):
                if other.node not in members:
                    members.add(other.node)
                    queue.append(other.node)
            else:
                if e2 not in boundary:
                    boundary.append(e2)
    if tgt.node in members:
        extra = sorted(
            e2
            for e2 in g.edges
            if e2 != eid
            and any(
                isinstance(end, NodePort) and end.node == tgt.node
                for end in (g.edges[e2].source, g.edges[e2].target)
            )
        )
        raise NotIsolated(
            f"component through {eid} loops back into {tgt.node}", boundary=extra
        )
    if boundary:
        raise NotIsolated(
            f"component through {eid} has {len(boundary)} extra boundary edge(s)",
            boundary=sorted(boundary),
        )
    return members
