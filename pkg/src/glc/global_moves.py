"""Moves with unbounded side conditions: GLOBAL FAN-OUT, GLOBAL PRUNING, ext1.

These are registered into the shared move registry so scripts, the CLI and
the session service dispatch them like catalog moves; their side conditions
(component isolation, the no-oriented-path check) live here.
"""

from __future__ import annotations

from collections import deque

from .graph import (
    APP,
    APP_GATE,
    FANOUT,
    FANOUT_GATE,
    LAMBDA,
    LAMBDA_GATE,
    TERMINATION,
    Edge,
    Graph,
    GraphError,
    NodePort,
    NotIsolated,
    OutputLeaf,
    component_through,
)
from .iso import canonical_key
from .moves import (
    FORWARD,
    MoveKind,
    NotIsomorphicPair,
    PathExists,
    Site,
    _Surgery,
    apply_move,
    apply_patch,
    attach_single,
    consumer_of,
    feeder_of,
    register_move,
    splice,
)


def _isolated_component(g: Graph, eid: str) -> set[str]:
    """Like component_through but without the anchor-kind precondition."""
    edge = g.edges[eid]
    if not isinstance(edge.source, NodePort):
        raise NotIsolated(f"edge {eid} is fed by a leaf", boundary=[eid])
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
            e = g.edges[e2]
            other = e.source if e.target == NodePort(n, port) else e.target
            if isinstance(other, NodePort):
                if other.node not in members:
                    members.add(other.node)
                    queue.append(other.node)
            elif e2 not in boundary:
                boundary.append(e2)
    tgt = edge.target
    if isinstance(tgt, NodePort) and tgt.node in members:
        raise NotIsolated(f"component through {eid} loops back into {tgt.node}")
    if boundary:
        raise NotIsolated(
            f"component through {eid} has extra boundary", boundary=sorted(boundary)
        )
    return members


def component_weight(g: Graph, members: set[str]) -> int:
    """Nodes plus internal arrows, the LOCAL FAN-OUT size measure."""
    internal = sum(
        1
        for e in g.edges.values()
        if isinstance(e.source, NodePort)
        and isinstance(e.target, NodePort)
        and e.source.node in members
        and e.target.node in members
    )
    return len(members) + internal


def rooted_component_key(g: Graph, members: set[str], root_edge: str) -> bytes:
    """Canonical key of the component with its root arrow marked."""
    nodes = {n: g.nodes[n] for n in members}
    edges = {}
    for eid, e in g.edges.items():
        if eid == root_edge:
            edges[eid] = Edge(e.source, OutputLeaf("@root"))
        elif (
            isinstance(e.source, NodePort)
            and isinstance(e.target, NodePort)
            and e.source.node in members
            and e.target.node in members
        ):
            edges[eid] = e
    sub = Graph(nodes, edges, set())
    return canonical_key(sub, match_leaf_names=True)


def _copy_component(
    sur: _Surgery, members: set[str], root_edge: str, consumer_end
) -> dict[str, str]:
    """Add a fresh copy of the component, wiring its root to consumer_end."""
    g = sur.g
    idmap: dict[str, str] = {}
    for n in sorted(members):
        idmap[n] = sur.add_node(g.nodes[n], "c")
    root_src = g.edges[root_edge].source

    def remap(end):
        return NodePort(idmap[end.node], end.port)

    for eid in sorted(g.edges):
        e = g.edges[eid]
        if (
            eid != root_edge
            and isinstance(e.source, NodePort)
            and isinstance(e.target, NodePort)
            and e.source.node in members
            and e.target.node in members
        ):
            sur.add_edge(remap(e.source), remap(e.target))
    sur.add_edge(remap(root_src), consumer_end)
    return idmap


# -- GLOBAL FAN-OUT -------------------------------------------------------------


def _gf_check(g: Graph, move: MoveKind, direction: str, anchor) -> bool:
    if direction == FORWARD:
        if len(anchor) != 1 or anchor[0] not in g.edges:
            return False
        tgt = g.edges[anchor[0]].target
        return (
            isinstance(tgt, NodePort)
            and tgt.node in g.nodes
            and g.nodes[tgt.node].kind == FANOUT
            and tgt.port == "in"
        )
    return len(anchor) == 2 and anchor[0] in g.edges and anchor[1] in g.edges


def _gf_enumerate(g: Graph, move: MoveKind, direction: str):
    bound = move.bound if move.name == "local_fanout" else None
    if direction == FORWARD:
        out = []
        for eid in sorted(g.edges):
            if not _gf_check(g, move, FORWARD, (eid,)):
                continue
            try:
                members = component_through(g, eid)
            except GraphError:
                continue
            if bound is not None and component_weight(g, members) > bound:
                continue
            out.append((eid,))
        return out
    # reverse: pairs of isolated, rooted-isomorphic, disjoint components
    rooted: dict[str, tuple[set[str], bytes]] = {}
    for eid in sorted(g.edges):
        if isinstance(g.edges[eid].source, NodePort):
            try:
                members = _isolated_component(g, eid)
            except GraphError:
                continue
            if bound is not None and component_weight(g, members) > bound:
                continue
            rooted[eid] = (members, rooted_component_key(g, members, eid))
    out = []
    for e1, (m1, k1) in rooted.items():
        for e2, (m2, k2) in rooted.items():
            if e1 != e2 and k1 == k2 and not (m1 & m2):
                out.append((e1, e2))
    return out


def _gf_build(sur: _Surgery, move: MoveKind, direction: str, anchor) -> None:
    g = sur.g
    bound = move.bound if move.name == "local_fanout" else None
    if direction == FORWARD:
        eid = anchor[0]
        members = component_through(g, eid)
        if bound is not None and component_weight(g, members) > bound:
            raise NotIsolated(
                f"component exceeds the local fan-out bound {bound}",
                boundary=[eid],
            )
        f = g.edges[eid].target.node
        left_tgt = g.consumer(f, "left_out")
        right_tgt = g.consumer(f, "right_out")
        sur.remove_node(f)
        for n in members:
            sur.remove_node(n)
        for e2 in sorted(g.edges):
            e = g.edges[e2]
            if any(
                isinstance(end, NodePort) and (end.node in members or end.node == f)
                for end in (e.source, e.target)
            ):
                sur.remove_edge(e2)
        map_left = _copy_component(sur, members, eid, left_tgt)
        map_right = _copy_component(sur, members, eid, right_tgt)
        left_edge = next(
            e for e, ed in sur.patch.added_edges.items() if ed.target == left_tgt
        )
        right_edge = next(
            e for e, ed in sur.patch.added_edges.items() if ed.target == right_tgt
        )
        sur.patch.info.update(
            nodes=(f,),
            copies=(map_left, map_right),
            left_edge=left_edge,
            right_edge=right_edge,
        )
    else:
        e1, e2 = anchor
        m1 = _isolated_component(g, e1)
        m2 = _isolated_component(g, e2)
        if bound is not None and (
            component_weight(g, m1) > bound or component_weight(g, m2) > bound
        ):
            raise NotIsolated(f"component exceeds the local fan-out bound {bound}")
        if m1 & m2:
            raise NotIsomorphicPair("components overlap")
        k1 = rooted_component_key(g, m1, e1)
        k2 = rooted_component_key(g, m2, e2)
        if k1 != k2:
            raise NotIsomorphicPair(
                "components at the two arrows are not isomorphic as rooted graphs"
            )
        tgt1, tgt2 = g.edges[e1].target, g.edges[e2].target
        root1 = g.edges[e1].source
        f = sur.add_node(FANOUT_GATE, "f")
        # drop the second copy entirely
        for n in m2:
            sur.remove_node(n)
        for e3 in sorted(g.edges):
            e = g.edges[e3]
            if any(
                isinstance(end, NodePort) and end.node in m2
                for end in (e.source, e.target)
            ):
                sur.remove_edge(e3)
        sur.remove_edge(e1)
        anchor_edge = sur.add_edge(root1, NodePort(f, "in"))
        sur.add_edge(NodePort(f, "left_out"), tgt1)
        sur.add_edge(NodePort(f, "right_out"), tgt2)
        sur.patch.info.update(nodes=(f,), anchor_edge=anchor_edge)


register_move("global_fanout", _gf_enumerate, _gf_check, _gf_build)
register_move("local_fanout", _gf_enumerate, _gf_check, _gf_build)


def global_fanout(
    g: Graph, eid: str, direction: str = FORWARD, partner: str | None = None
):
    """Replace the isolated component feeding a Υ gate by two copies
    (forward), or merge two isomorphic isolated components into one plus a
    Υ gate (reverse; ``partner`` names the second arrow)."""
    move = MoveKind("global_fanout")
    anchor = (eid,) if direction == FORWARD else (eid, partner)
    return apply_move(g, Site(move, direction, anchor))


# -- GLOBAL PRUNING --------------------------------------------------------------


def _gp_check(g: Graph, move: MoveKind, direction: str, anchor) -> bool:
    if len(anchor) != 1 or anchor[0] not in g.edges:
        return False
    tgt = g.edges[anchor[0]].target
    return (
        isinstance(tgt, NodePort)
        and tgt.node in g.nodes
        and g.nodes[tgt.node].kind == TERMINATION
    )


def _gp_enumerate(g: Graph, move: MoveKind, direction: str):
    out = []
    for eid in sorted(g.edges):
        if not _gp_check(g, move, FORWARD, (eid,)):
            continue
        try:
            component_through(g, eid)
        except GraphError:
            continue
        out.append((eid,))
    return out


def _gp_build(sur: _Surgery, move: MoveKind, direction: str, anchor) -> None:
    g = sur.g
    eid = anchor[0]
    members = component_through(g, eid)
    t = g.edges[eid].target.node
    for n in members | {t}:
        sur.remove_node(n)
    for e2 in sorted(g.edges):
        e = g.edges[e2]
        if any(
            isinstance(end, NodePort) and (end.node in members or end.node == t)
            for end in (e.source, e.target)
        ):
            sur.remove_edge(e2)
    sur.patch.info["nodes"] = (t,)


register_move("global_prune", _gp_enumerate, _gp_check, _gp_build)


def global_prune(g: Graph, eid: str):
    """Remove a component connected only to a termination gate. One-way."""
    return apply_move(g, Site(MoveKind("global_prune"), FORWARD, (eid,)))


# -- ext1 (eta) -------------------------------------------------------------------


def _ext1_pattern(g: Graph, l: str, a: str) -> bool:
    return (
        l in g.nodes
        and a in g.nodes
        and g.nodes[l].kind == LAMBDA
        and g.nodes[a].kind == APP
        and g.consumer(a, "out") == NodePort(l, "in")
        and g.consumer(l, "var_out") == NodePort(a, "arg_in")
    )


def _succ_excluding(g: Graph, node: str, excluded: set[str]) -> set[str]:
    out = set()
    for port in g.nodes[node].out_ports():
        tgt = g.edges[g.edge_at(node, port)].target
        if isinstance(tgt, NodePort) and tgt.node not in excluded:
            out.add(tgt.node)
    return out


def _oriented_path(
    g: Graph, start_end, stop_end, excluded: set[str]
) -> list[str] | None:
    """A node path witnessing flow from a target endpoint to a source
    endpoint, passing through any node input→output, avoiding ``excluded``.
    None when no such path exists."""
    if not isinstance(start_end, NodePort) or not isinstance(stop_end, NodePort):
        return None
    if start_end.node in excluded or stop_end.node in excluded:
        return None
    start, stop = start_end.node, stop_end.node
    if start == stop:
        return [start]
    parents: dict[str, str] = {}
    queue = deque([start])
    seen = {start}
    while queue:
        n = queue.popleft()
        for m in _succ_excluding(g, n, excluded):
            if m in seen:
                continue
            parents[m] = n
            if m == stop:
                path = [m]
                while path[-1] != start:
                    path.append(parents[path[-1]])
                return list(reversed(path))
            seen.add(m)
            queue.append(m)
    return None


def ext1_side_condition(g: Graph, l: str, a: str) -> list[str] | None:
    """A witnessing path from "2" (λ's term exit) back to "1" (∧'s fun
    feeder) outside the pattern, or None when the move is allowed."""
    e2 = g.edge_at(l, "term_out")
    e1 = g.edge_at(a, "fun_in")
    if e1 == e2:
        return [e1]
    return _oriented_path(g, g.edges[e2].target, g.edges[e1].source, {l, a})


def _ext1_check(g: Graph, move: MoveKind, direction: str, anchor) -> bool:
    if direction == FORWARD:
        return len(anchor) == 2 and _ext1_pattern(g, anchor[0], anchor[1])
    if len(anchor) != 1:
        return False
    att = anchor[0]
    return (
        isinstance(att, tuple)
        and len(att) == 2
        and att[0] == "edge"
        and att[1] in g.edges
    )


def _ext1_enumerate(g: Graph, move: MoveKind, direction: str):
    if direction == FORWARD:
        out = []
        for l in sorted(g.nodes):
            if g.nodes[l].kind != LAMBDA:
                continue
            end = g.consumer(l, "var_out")
            if (
                isinstance(end, NodePort)
                and _ext1_pattern(g, l, end.node)
                and ext1_side_condition(g, l, end.node) is None
            ):
                out.append((l, end.node))
        return out
    out = []
    for eid in sorted(g.edges):
        e = g.edges[eid]
        if _oriented_path(g, e.target, e.source, set()) is None:
            out.append((("edge", eid),))
    return out


def _ext1_build(sur: _Surgery, move: MoveKind, direction: str, anchor) -> None:
    g = sur.g
    if direction == FORWARD:
        l, a = anchor
        witness = ext1_side_condition(g, l, a)
        if witness is not None:
            raise PathExists(
                "an oriented path connects \"2\" back to \"1\" outside the pattern",
                witness=witness,
            )
        sur.patch.info["nodes"] = (l, a)
        splice(sur, {l, a}, [(feeder_of(a, "fun_in"), consumer_of(l, "term_out"))])
    else:
        att = anchor[0]
        eid = att[1]
        e = g.edges[eid]
        witness = _oriented_path(g, e.target, e.source, set())
        if witness is not None:
            raise PathExists(
                "an oriented path connects the edge's ends outside it",
                witness=witness,
            )
        l = sur.add_node(LAMBDA_GATE)
        a = sur.add_node(APP_GATE)
        sur.add_edge(NodePort(a, "out"), NodePort(l, "in"))
        sur.add_edge(NodePort(l, "var_out"), NodePort(a, "arg_in"))
        sur.patch.info["nodes"] = (l, a)
        attach_single(sur, att, NodePort(a, "fun_in"), NodePort(l, "term_out"))


register_move("ext1", _ext1_enumerate, _ext1_check, _ext1_build)


def ext1(g: Graph, site_anchor, direction: str = FORWARD, unchecked: bool = False):
    """Apply the eta move; forward anchors are (lambda id, app id).

    ``unchecked=True`` performs the replacement-by-edge even when the path
    side condition fails — scenario use only, for replaying what a
    hypothetical application would produce.
    """
    move = MoveKind("ext1")
    site = Site(move, direction, tuple(site_anchor))
    if not unchecked:
        return apply_move(g, site)
    if direction != FORWARD:
        raise ValueError("unchecked ext1 is forward-only")
    l, a = site.anchor
    if not _ext1_pattern(g, l, a):
        raise GraphError(f"no ext1 pattern at ({l}, {a})")
    sur = _Surgery(g)
    sur.patch.info["nodes"] = (l, a)
    splice(sur, {l, a}, [(feeder_of(a, "fun_in"), consumer_of(l, "term_out"))])
    return apply_patch(g, sur.patch), sur.patch
