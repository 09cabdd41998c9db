"""The local move catalog as port-level graph surgeries.

Every deletion surgery goes through one chasing rule: removed pattern nodes
leave "through" arrows behind, arrows that compose across chains of deleted
ports and close into loops when a chain has no surviving endpoint. Reverse
(insertion) surgeries cut attachment points — an edge, a loop, or the same
edge twice with an explicit order — and graft the pattern's boundary onto
the stubs. Both produce a reversible Patch.

Site identity is intentionally labelling-sensitive: the same pair of arrows
cut in the two possible orders yields different graphs, which is the point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .coeff import ONE, Coefficient
from .graph import (
    APP,
    APP_GATE,
    DILATION,
    FANOUT,
    FANOUT_GATE,
    LAMBDA,
    LAMBDA_GATE,
    TERMINATION,
    TERMINATION_GATE,
    Edge,
    GateKind,
    Graph,
    GraphError,
    InputLeaf,
    NodePort,
    OutputLeaf,
    dilation_gate,
)


class SiteStale(GraphError):
    code = "SITE_STALE"


class DirectionForbidden(GraphError):
    code = "DIRECTION_FORBIDDEN"


class SelectorEmpty(GraphError):
    code = "SELECTOR_EMPTY"

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class SelectorAmbiguous(GraphError):
    code = "SELECTOR_AMBIGUOUS"

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class NotIsomorphicPair(GraphError):
    code = "NOT_ISOMORPHIC_PAIR"


class PathExists(GraphError):
    code = "PATH_EXISTS"

    def __init__(self, message: str, witness: list[str] | None = None):
        super().__init__(message)
        self.witness = witness or []


FORWARD = "forward"
REVERSE = "reverse"

# name -> (parameter names, bidirectional)
CATALOG: dict[str, tuple[tuple[str, ...], bool]] = {
    "beta": ((), True),
    "ext_beta": (("coef",), True),
    "beta_star": (("coef",), True),
    "co_comm": ((), True),
    "co_assoc": ((), True),
    "local_fanout": (("bound",), True),
    "prune_app": ((), False),
    "prune_lambda": ((), False),
    "prune_dilation": ((), False),
    "prune_fanout_one": ((), False),
    "prune_fanout_both": ((), False),
    "loop_add": ((), False),
    "loop_remove": ((), False),
    "r1a": (("coef",), True),
    "r1b": (("coef",), True),
    "r2": (("coef", "coef2"), True),
    "ext2": ((), True),
    # global moves; surgeries live in glc.global_moves
    "global_fanout": ((), True),
    "global_prune": ((), False),
    "ext1": ((), True),
}


@dataclass(frozen=True)
class MoveKind:
    """A move from the catalog, with its coefficient/bound parameters bound."""

    name: str
    coef: Coefficient | None = None
    coef2: Coefficient | None = None
    bound: int | None = None

    def __post_init__(self):
        if self.name not in CATALOG:
            raise ValueError(f"unknown move {self.name!r}")
        params, _ = CATALOG[self.name]
        want = {
            "coef": "coef" in params,
            "coef2": "coef2" in params,
            "bound": "bound" in params,
        }
        got = {
            "coef": self.coef is not None,
            "coef2": self.coef2 is not None,
            "bound": self.bound is not None,
        }
        if want != got:
            raise ValueError(f"move {self.name} takes parameters {params}")

    def bidirectional(self) -> bool:
        return CATALOG[self.name][1]

    def __str__(self) -> str:
        bits = [self.name]
        if self.coef is not None:
            bits.append(str(self.coef))
        if self.coef2 is not None:
            bits.append(str(self.coef2))
        if self.bound is not None:
            bits.append(str(self.bound))
        return "(".join(bits[:1]) + ("(" + ", ".join(bits[1:]) + ")" if bits[1:] else "")


def beta() -> MoveKind:
    return MoveKind("beta")


def ext_beta(coef: Coefficient) -> MoveKind:
    return MoveKind("ext_beta", coef=coef)


def beta_star(coef: Coefficient) -> MoveKind:
    return MoveKind("beta_star", coef=coef)


def r1a(coef: Coefficient) -> MoveKind:
    return MoveKind("r1a", coef=coef)


def r1b(coef: Coefficient) -> MoveKind:
    return MoveKind("r1b", coef=coef)


def r2(coef: Coefficient, coef2: Coefficient) -> MoveKind:
    return MoveKind("r2", coef=coef, coef2=coef2)


# Attachment points for reverse surgeries: ("edge", id) or ("loop", id).
Attachment = tuple[str, str]


@dataclass(frozen=True)
class Site:
    """A concrete application location for (move, direction)."""

    move: MoveKind
    direction: str
    anchor: tuple

    def __str__(self):
        return f"{self.move} {self.direction} @ {self.anchor}"


@dataclass
class Patch:
    """A reversible delta between two graphs."""

    removed_nodes: dict[str, GateKind] = field(default_factory=dict)
    removed_edges: dict[str, Edge] = field(default_factory=dict)
    removed_loops: set[str] = field(default_factory=set)
    added_nodes: dict[str, GateKind] = field(default_factory=dict)
    added_edges: dict[str, Edge] = field(default_factory=dict)
    added_loops: set[str] = field(default_factory=set)
    info: dict = field(default_factory=dict)


def apply_patch(g: Graph, patch: Patch) -> Graph:
    return g.with_delta(
        patch.removed_nodes,
        patch.removed_edges,
        patch.removed_loops,
        patch.added_nodes,
        patch.added_edges,
        patch.added_loops,
    )


def revert_patch(g: Graph, patch: Patch) -> Graph:
    return g.with_delta(
        patch.added_nodes,
        patch.added_edges,
        patch.added_loops,
        patch.removed_nodes,
        patch.removed_edges,
        patch.removed_loops,
    )


class _Surgery:
    """Accumulates one move's patch against a source graph."""

    def __init__(self, g: Graph):
        self.g = g
        self.patch = Patch()
        self._used: set[str] = set()
        self._next: dict[str, int] = {}

    def fresh(self, prefix: str) -> str:
        n = self._next.get(prefix, self.g._counters.get(prefix, 0))
        while True:
            cand = f"{prefix}{n}"
            n += 1
            if (
                cand not in self._used
                and cand not in self.g.nodes
                and cand not in self.g.edges
                and cand not in self.g.loops
            ):
                self._used.add(cand)
                self._next[prefix] = n
                return cand

    def add_node(self, kind: GateKind, prefix: str = "n") -> str:
        nid = self.fresh(prefix)
        self.patch.added_nodes[nid] = kind
        return nid

    def add_edge(self, src, tgt) -> str:
        eid = self.fresh("e")
        self.patch.added_edges[eid] = Edge(src, tgt)
        return eid

    def add_loop(self) -> str:
        lid = self.fresh("l")
        self.patch.added_loops.add(lid)
        return lid

    def remove_node(self, nid: str) -> None:
        self.patch.removed_nodes[nid] = self.g.nodes[nid]

    def remove_edge(self, eid: str) -> None:
        self.patch.removed_edges[eid] = self.g.edges[eid]

    def remove_loop(self, lid: str) -> None:
        self.patch.removed_loops.add(lid)


# Arrow endpoint specs for deletion surgeries.
def feeder_of(node: str, port: str):
    return ("feeder", node, port)


def consumer_of(node: str, port: str):
    return ("consumer", node, port)


def at(endpoint):
    return ("end", endpoint)


def splice(sur: _Surgery, deleted: set[str], arrows: list[tuple]) -> None:
    """Delete nodes and rewire by the chasing rule.

    Each arrow (source-spec, target-spec) contributes a new connection from
    the far end of the edge feeding a deleted input port (or an explicit
    endpoint) to the far end of the edge leaving a deleted output port (or
    an explicit endpoint). Chains running through several deleted ports
    compose into one arrow; closed chains become loops. Pattern edges whose
    deleted endpoints are not referenced by any arrow vanish.

    Records in patch.info: "arrows" — per arrow index ("edge", id) or
    ("loop", id) — and "chain_order" — per final edge, the arrow indexes it
    passed through, in flow order.
    """
    g = sur.g
    for n in deleted:
        sur.remove_node(n)

    retarget: dict[str, int] = {}
    resource: dict[str, int] = {}
    ends_in: dict[int, object] = {}
    ends_out: dict[int, object] = {}
    for i, (sspec, tspec) in enumerate(arrows):
        if sspec[0] == "feeder":
            eid = g.edge_at(sspec[1], sspec[2])
            assert g.edges[eid].target == NodePort(sspec[1], sspec[2])
            assert eid not in retarget, "two arrows feed from one port"
            retarget[eid] = i
        else:
            ends_in[i] = sspec[1]
        if tspec[0] == "consumer":
            eid = g.edge_at(tspec[1], tspec[2])
            assert g.edges[eid].source == NodePort(tspec[1], tspec[2])
            assert eid not in resource, "two arrows deliver to one port"
            resource[eid] = i
        else:
            ends_out[i] = tspec[1]

    # segments: (src, tgt) where each side is ("E", endpoint) or ("W", arrow index)
    # only edges at deleted ports can be touched (arrow specs always name
    # deleted nodes' ports), so the scan stays local to the pattern
    relevant = sorted(
        {g.edge_at(n, port) for n in deleted for port, _ in g.nodes[n].ports()}
        | set(retarget)
        | set(resource)
    )
    segments: list[tuple] = []
    for eid in relevant:
        e = g.edges[eid]
        src_del = isinstance(e.source, NodePort) and e.source.node in deleted
        tgt_del = isinstance(e.target, NodePort) and e.target.node in deleted
        sur.remove_edge(eid)
        src = ("W", resource[eid]) if eid in resource else ("E", e.source)
        tgt = ("W", retarget[eid]) if eid in retarget else ("E", e.target)
        if src[0] == "E" and src_del and eid not in resource:
            if tgt_del and eid not in retarget:
                continue  # pattern-internal edge, vanishes
            raise AssertionError(f"surgery leaves {e.source} dangling")
        if tgt[0] == "E" and tgt_del:
            raise AssertionError(f"surgery leaves {e.target} dangling")
        segments.append((src, tgt))
    for i, ep in ends_in.items():
        segments.append((("E", ep), ("W", i)))
    for i, ep in ends_out.items():
        segments.append((("W", i), ("E", ep)))

    seg_from: dict[int, tuple] = {}
    into_count: dict[int, int] = {}
    for seg in segments:
        if seg[0][0] == "W":
            assert seg[0][1] not in seg_from, "arrow with two outgoing segments"
            seg_from[seg[0][1]] = seg
        if seg[1][0] == "W":
            into_count[seg[1][1]] = into_count.get(seg[1][1], 0) + 1
    for i in range(len(arrows)):
        assert i in seg_from and into_count.get(i) == 1, f"arrow {i} not fully wired"

    arrow_loc: dict[int, tuple[str, str]] = {}
    chain_order: list[tuple[str, list[int]]] = []
    for seg in segments:
        if seg[0][0] != "E":
            continue
        chain: list[int] = []
        cur = seg
        while cur[1][0] == "W":
            chain.append(cur[1][1])
            cur = seg_from[cur[1][1]]
        eid = sur.add_edge(seg[0][1], cur[1][1])
        for i in chain:
            arrow_loc[i] = ("edge", eid)
        if chain:
            chain_order.append((eid, chain))
    done = set(arrow_loc)
    for i in range(len(arrows)):
        if i in done:
            continue
        cycle = [i]
        j = seg_from[i][1][1]
        while j != i:
            cycle.append(j)
            j = seg_from[j][1][1]
        lid = sur.add_loop()
        for k in cycle:
            arrow_loc[k] = ("loop", lid)
        done.update(cycle)
    sur.patch.info["arrows"] = [arrow_loc[i] for i in range(len(arrows))]
    sur.patch.info["chain_order"] = chain_order


def attach_single(sur: _Surgery, att: Attachment, inp: NodePort, outp: NodePort) -> None:
    """Cut one attachment point and graft a 1-in/1-out pattern boundary on it."""
    kind, aid = att
    if kind == "edge":
        e = sur.g.edges[aid]
        sur.remove_edge(aid)
        sur.patch.info["stubs"] = [sur.add_edge(e.source, inp), sur.add_edge(outp, e.target)]
    else:
        sur.remove_loop(aid)
        sur.patch.info["stubs"] = [sur.add_edge(outp, inp)]


def attach_pair(
    sur: _Surgery,
    att1: Attachment,
    att2: Attachment,
    order: int,
    in1: NodePort,
    out1: NodePort,
    in2: NodePort,
    out2: NodePort,
) -> None:
    """Cut an ordered pair of attachment points for the beta-family reverses.

    Attachment 1 carries the labels (1, 3): its source side feeds ``in1``
    and ``out1`` feeds its target side. Attachment 2 carries (4, 2). When
    both points lie on one edge, ``order`` says which cut comes first along
    the arrow; on one loop the two cyclic arcs make the order immaterial.
    """
    g = sur.g
    if att1 == att2:
        kind, aid = att1
        if kind == "edge":
            e = g.edges[aid]
            sur.remove_edge(aid)
            if order == 0:
                sur.add_edge(e.source, in1)
                sur.add_edge(out1, in2)
                sur.add_edge(out2, e.target)
            else:
                sur.add_edge(e.source, in2)
                sur.add_edge(out1, e.target)
                sur.add_edge(out2, in1)
        else:
            sur.remove_loop(aid)
            sur.add_edge(out1, in2)
            sur.add_edge(out2, in1)
        return
    for att, inp, outp in ((att1, in1, out1), (att2, in2, out2)):
        kind, aid = att
        if kind == "edge":
            e = g.edges[aid]
            sur.remove_edge(aid)
            sur.add_edge(e.source, inp)
            sur.add_edge(outp, e.target)
        else:
            sur.remove_loop(aid)
            sur.add_edge(outp, inp)


def attachments(g: Graph) -> list[Attachment]:
    return [("edge", e) for e in sorted(g.edges)] + [("loop", l) for l in sorted(g.loops)]


def _valid_attachment(g: Graph, att) -> bool:
    return (
        isinstance(att, tuple)
        and len(att) == 2
        and (
            (att[0] == "edge" and att[1] in g.edges)
            or (att[0] == "loop" and att[1] in g.loops)
        )
    )


def pair_sites(g: Graph, move: MoveKind) -> list[tuple]:
    """Canonical reverse anchors: ordered pairs with one cut per edge, both
    orders on same-edge pairs, one cyclic pair per loop."""
    atts = attachments(g)
    out: list[tuple] = []
    for a1 in atts:
        for a2 in atts:
            if a1 == a2:
                if a1[0] == "edge":
                    out.append((a1, a2, 0))
                    out.append((a1, a2, 1))
                else:
                    out.append((a1, a2, 0))
            else:
                out.append((a1, a2, 0))
    return out


# ---------------------------------------------------------------------------
# Per-move handlers. Each entry: enumerate(g, move, direction) -> anchors,
# check(g, move, direction, anchor) -> bool, build(sur, move, direction,
# anchor) -> None. Registered global moves add theirs from glc.global_moves.
# ---------------------------------------------------------------------------

_HANDLERS: dict[str, dict] = {}


def register_move(name: str, enumerate_fn, check_fn, build_fn) -> None:
    _HANDLERS[name] = {"enumerate": enumerate_fn, "check": check_fn, "build": build_fn}


def _is_kind(g: Graph, nid, kind: str) -> bool:
    return isinstance(nid, str) and nid in g.nodes and g.nodes[nid].kind == kind


# -- beta family --------------------------------------------------------------

# family name -> (upper kind, lower kind, upper port names, lower port names)
# The "upper" gate plays λ's role, the "lower" gate ∧'s; for the dual move the
# correspondence is in→in, var_out→right_out, term_out→left_out, fun_in→x_in,
# arg_in→y_in, out→out.
_FAMILY = {
    "beta": (LAMBDA, APP, ("in", "var_out", "term_out"), ("fun_in", "arg_in", "out")),
    "beta_star": (FANOUT, DILATION, ("in", "right_out", "left_out"), ("x_in", "y_in", "out")),
}


def _family_gates(move: MoveKind) -> tuple[GateKind, GateKind, tuple, tuple]:
    upper_kind, lower_kind, up, lo = _FAMILY[move.name]
    upper = LAMBDA_GATE if upper_kind == LAMBDA else FANOUT_GATE
    lower = APP_GATE if lower_kind == APP else dilation_gate(move.coef)
    return upper, lower, up, lo


def _family_check_forward(g: Graph, move: MoveKind, anchor) -> bool:
    if len(anchor) != 1 or anchor[0] not in g.edges:
        return False
    e = g.edges[anchor[0]]
    if not (isinstance(e.source, NodePort) and isinstance(e.target, NodePort)):
        return False
    upper_kind, lower_kind, up, lo = _FAMILY[move.name]
    if not (_is_kind(g, e.source.node, upper_kind) and e.source.port == up[2]):
        return False
    if not (_is_kind(g, e.target.node, lower_kind) and e.target.port == lo[0]):
        return False
    if move.name == "beta_star" and g.nodes[e.target.node].coef != move.coef:
        return False
    return True


def _family_enumerate(g: Graph, move: MoveKind, direction: str):
    if direction == REVERSE:
        return pair_sites(g, move)
    out = []
    for eid in sorted(g.edges):
        if _family_check_forward(g, move, (eid,)):
            out.append((eid,))
    return out


def _family_check(g: Graph, move: MoveKind, direction: str, anchor) -> bool:
    if direction == FORWARD:
        return _family_check_forward(g, move, anchor)
    if len(anchor) != 3:
        return False
    a1, a2, order = anchor
    if not (_valid_attachment(g, a1) and _valid_attachment(g, a2) and order in (0, 1)):
        return False
    if a1 == a2 and a1[0] == "loop" and order != 0:
        return False
    return True


def _family_build(sur: _Surgery, move: MoveKind, direction: str, anchor) -> None:
    g = sur.g
    upper_gate, lower_gate, up, lo = _family_gates(move)
    if direction == FORWARD:
        e = g.edges[anchor[0]]
        un, ln = e.source.node, e.target.node
        sur.patch.info["nodes"] = (un, ln)
        splice(
            sur,
            {un, ln},
            [
                (feeder_of(un, up[0]), consumer_of(ln, lo[2])),
                (feeder_of(ln, lo[1]), consumer_of(un, up[1])),
            ],
        )
    else:
        a1, a2, order = anchor
        un = sur.add_node(upper_gate)
        ln = sur.add_node(lower_gate)
        eid = sur.add_edge(NodePort(un, up[2]), NodePort(ln, lo[0]))
        sur.patch.info["nodes"] = (un, ln)
        sur.patch.info["anchor_edge"] = eid
        attach_pair(
            sur,
            a1,
            a2,
            order,
            NodePort(un, up[0]),
            NodePort(ln, lo[2]),
            NodePort(ln, lo[1]),
            NodePort(un, up[1]),
        )


for _n in ("beta", "beta_star"):
    register_move(_n, _family_enumerate, _family_check, _family_build)


# -- extended beta ------------------------------------------------------------


def _ext_beta_bind(g: Graph, eid: str, coef: Coefficient):
    """Bind the four-gate pattern from its λ–∧ edge, or None."""
    if eid not in g.edges:
        return None
    e = g.edges[eid]
    if not (isinstance(e.source, NodePort) and isinstance(e.target, NodePort)):
        return None
    L, A = e.source.node, e.target.node
    if not (_is_kind(g, L, LAMBDA) and e.source.port == "term_out"):
        return None
    if not (_is_kind(g, A, APP) and e.target.port == "fun_in"):
        return None
    f_end = g.consumer(A, "out")
    if not (isinstance(f_end, NodePort) and _is_kind(g, f_end.node, FANOUT) and f_end.port == "in"):
        return None
    F = f_end.node
    d_end = g.consumer(F, "left_out")
    if not (
        isinstance(d_end, NodePort)
        and _is_kind(g, d_end.node, DILATION)
        and d_end.port == "x_in"
    ):
        return None
    D = d_end.node
    if g.nodes[D].coef != coef:
        return None
    if g.consumer(L, "var_out") != NodePort(D, "y_in"):
        return None
    return L, A, F, D


def _ext_beta_enumerate(g: Graph, move: MoveKind, direction: str):
    if direction == REVERSE:
        return pair_sites(g, move)
    return [
        (eid,) for eid in sorted(g.edges) if _ext_beta_bind(g, eid, move.coef) is not None
    ]


def _ext_beta_check(g: Graph, move: MoveKind, direction: str, anchor) -> bool:
    if direction == FORWARD:
        return len(anchor) == 1 and _ext_beta_bind(g, anchor[0], move.coef) is not None
    return _family_check(g, move, direction, anchor)


def _ext_beta_build(sur: _Surgery, move: MoveKind, direction: str, anchor) -> None:
    g = sur.g
    if direction == FORWARD:
        L, A, F, D = _ext_beta_bind(g, anchor[0], move.coef)
        sur.patch.info["nodes"] = (L, A, F, D)
        splice(
            sur,
            {L, A, F, D},
            [
                (feeder_of(L, "in"), consumer_of(D, "out")),
                (feeder_of(A, "arg_in"), consumer_of(F, "right_out")),
            ],
        )
    else:
        a1, a2, order = anchor
        L = sur.add_node(LAMBDA_GATE)
        A = sur.add_node(APP_GATE)
        F = sur.add_node(FANOUT_GATE)
        D = sur.add_node(dilation_gate(move.coef))
        eid = sur.add_edge(NodePort(L, "term_out"), NodePort(A, "fun_in"))
        sur.add_edge(NodePort(A, "out"), NodePort(F, "in"))
        sur.add_edge(NodePort(F, "left_out"), NodePort(D, "x_in"))
        sur.add_edge(NodePort(L, "var_out"), NodePort(D, "y_in"))
        sur.patch.info["nodes"] = (L, A, F, D)
        sur.patch.info["anchor_edge"] = eid
        attach_pair(
            sur,
            a1,
            a2,
            order,
            NodePort(L, "in"),
            NodePort(D, "out"),
            NodePort(A, "arg_in"),
            NodePort(F, "right_out"),
        )


register_move("ext_beta", _ext_beta_enumerate, _ext_beta_check, _ext_beta_build)


# -- fan-out moves ------------------------------------------------------------


def _co_comm_enumerate(g: Graph, move: MoveKind, direction: str):
    return [(n,) for n in sorted(g.nodes) if g.nodes[n].kind == FANOUT]


def _co_comm_check(g: Graph, move: MoveKind, direction: str, anchor) -> bool:
    return len(anchor) == 1 and _is_kind(g, anchor[0], FANOUT)


def _co_comm_build(sur: _Surgery, move: MoveKind, direction: str, anchor) -> None:
    g = sur.g
    f = anchor[0]
    el, er = g.edge_at(f, "left_out"), g.edge_at(f, "right_out")
    lt, rt = g.edges[el].target, g.edges[er].target
    sur.remove_edge(el)
    sur.remove_edge(er)
    sur.add_edge(NodePort(f, "left_out"), rt)
    sur.add_edge(NodePort(f, "right_out"), lt)
    sur.patch.info["nodes"] = (f,)


register_move("co_comm", _co_comm_enumerate, _co_comm_check, _co_comm_build)


def _co_assoc_ports(direction: str) -> tuple[str, str]:
    # forward rewires the left-leaning tree to right-leaning; reverse undoes it
    return ("left_out", "right_out") if direction == FORWARD else ("right_out", "left_out")


def _co_assoc_check(g: Graph, move: MoveKind, direction: str, anchor) -> bool:
    if len(anchor) != 1 or anchor[0] not in g.edges:
        return False
    e = g.edges[anchor[0]]
    hang, _ = _co_assoc_ports(direction)
    return (
        isinstance(e.source, NodePort)
        and isinstance(e.target, NodePort)
        and _is_kind(g, e.source.node, FANOUT)
        and _is_kind(g, e.target.node, FANOUT)
        and e.source.node != e.target.node
        and e.source.port == hang
        and e.target.port == "in"
    )


def _co_assoc_enumerate(g: Graph, move: MoveKind, direction: str):
    return [(eid,) for eid in sorted(g.edges) if _co_assoc_check(g, move, direction, (eid,))]


def _co_assoc_build(sur: _Surgery, move: MoveKind, direction: str, anchor) -> None:
    g = sur.g
    e0 = anchor[0]
    hang, other = _co_assoc_ports(direction)
    p, q = g.edges[e0].source.node, g.edges[e0].target.node
    if direction == FORWARD:
        # (a b) c: Q carries a,b; P carries c  ->  a (b c): P carries a; Q carries b,c
        ea, eb, ec = g.edge_at(q, "left_out"), g.edge_at(q, "right_out"), g.edge_at(p, other)
        a, b, c = g.edges[ea].target, g.edges[eb].target, g.edges[ec].target
        for eid in (e0, ea, eb, ec):
            sur.remove_edge(eid)
        anchor_edge = sur.add_edge(NodePort(p, other), NodePort(q, "in"))
        sur.add_edge(NodePort(p, "left_out"), a)
        sur.add_edge(NodePort(q, "left_out"), b)
        sur.add_edge(NodePort(q, "right_out"), c)
    else:
        ea, eb, ec = g.edge_at(p, other), g.edge_at(q, "left_out"), g.edge_at(q, "right_out")
        a, b, c = g.edges[ea].target, g.edges[eb].target, g.edges[ec].target
        for eid in (e0, ea, eb, ec):
            sur.remove_edge(eid)
        anchor_edge = sur.add_edge(NodePort(p, other), NodePort(q, "in"))
        sur.add_edge(NodePort(q, "left_out"), a)
        sur.add_edge(NodePort(q, "right_out"), b)
        sur.add_edge(NodePort(p, hang), c)
    sur.patch.info["nodes"] = (p, q)
    sur.patch.info["anchor_edge"] = anchor_edge


register_move("co_assoc", _co_assoc_enumerate, _co_assoc_check, _co_assoc_build)


# -- pruning family (forward only) ---------------------------------------------


def _terminated(g: Graph, nid: str, port: str) -> str | None:
    """The termination node consuming this output port, if any."""
    end = g.consumer(nid, port)
    if isinstance(end, NodePort) and _is_kind(g, end.node, TERMINATION):
        return end.node
    return None


def _prune_app_check(g, move, direction, anchor):
    if len(anchor) != 1 or anchor[0] not in g.edges:
        return False
    e = g.edges[anchor[0]]
    return (
        isinstance(e.source, NodePort)
        and isinstance(e.target, NodePort)
        and _is_kind(g, e.source.node, APP)
        and e.source.port == "out"
        and _is_kind(g, e.target.node, TERMINATION)
    )


def _prune_app_build(sur, move, direction, anchor):
    g = sur.g
    e = g.edges[anchor[0]]
    a, t = e.source.node, e.target.node
    t1 = sur.add_node(TERMINATION_GATE, "t")
    t2 = sur.add_node(TERMINATION_GATE, "t")
    sur.patch.info["nodes"] = (a, t)
    splice(
        sur,
        {a, t},
        [
            (feeder_of(a, "fun_in"), at(NodePort(t1, "in"))),
            (feeder_of(a, "arg_in"), at(NodePort(t2, "in"))),
        ],
    )


register_move(
    "prune_app",
    lambda g, m, d: [(e,) for e in sorted(g.edges) if _prune_app_check(g, m, d, (e,))],
    _prune_app_check,
    _prune_app_build,
)


def _prune_lambda_check(g, move, direction, anchor):
    if len(anchor) != 1 or not _is_kind(g, anchor[0], LAMBDA):
        return False
    l = anchor[0]
    return _terminated(g, l, "term_out") is not None and _terminated(g, l, "var_out") is not None


def _prune_lambda_build(sur, move, direction, anchor):
    g = sur.g
    l = anchor[0]
    t1, t2 = _terminated(g, l, "term_out"), _terminated(g, l, "var_out")
    t3 = sur.add_node(TERMINATION_GATE, "t")
    sur.patch.info["nodes"] = (l, t1, t2)
    splice(sur, {l, t1, t2}, [(feeder_of(l, "in"), at(NodePort(t3, "in")))])


register_move(
    "prune_lambda",
    lambda g, m, d: [(n,) for n in sorted(g.nodes) if _prune_lambda_check(g, m, d, (n,))],
    _prune_lambda_check,
    _prune_lambda_build,
)


def _prune_dilation_check(g, move, direction, anchor):
    if len(anchor) != 1 or anchor[0] not in g.edges:
        return False
    e = g.edges[anchor[0]]
    return (
        isinstance(e.source, NodePort)
        and isinstance(e.target, NodePort)
        and _is_kind(g, e.source.node, DILATION)
        and e.source.port == "out"
        and _is_kind(g, e.target.node, TERMINATION)
    )


def _prune_dilation_build(sur, move, direction, anchor):
    g = sur.g
    e = g.edges[anchor[0]]
    d, t = e.source.node, e.target.node
    t1 = sur.add_node(TERMINATION_GATE, "t")
    t2 = sur.add_node(TERMINATION_GATE, "t")
    sur.patch.info["nodes"] = (d, t)
    splice(
        sur,
        {d, t},
        [
            (feeder_of(d, "x_in"), at(NodePort(t1, "in"))),
            (feeder_of(d, "y_in"), at(NodePort(t2, "in"))),
        ],
    )


register_move(
    "prune_dilation",
    lambda g, m, d: [(e,) for e in sorted(g.edges) if _prune_dilation_check(g, m, d, (e,))],
    _prune_dilation_check,
    _prune_dilation_build,
)


def _prune_fanout_one_check(g, move, direction, anchor):
    if len(anchor) != 2 or not _is_kind(g, anchor[0], FANOUT):
        return False
    f, side = anchor
    if side not in ("left_out", "right_out"):
        return False
    other = "right_out" if side == "left_out" else "left_out"
    return _terminated(g, f, side) is not None and _terminated(g, f, other) is None


def _prune_fanout_one_build(sur, move, direction, anchor):
    g = sur.g
    f, side = anchor
    other = "right_out" if side == "left_out" else "left_out"
    t = _terminated(g, f, side)
    sur.patch.info["nodes"] = (f, t)
    splice(sur, {f, t}, [(feeder_of(f, "in"), consumer_of(f, other))])


register_move(
    "prune_fanout_one",
    lambda g, m, d: [
        (n, side)
        for n in sorted(g.nodes)
        for side in ("left_out", "right_out")
        if _prune_fanout_one_check(g, m, d, (n, side))
    ],
    _prune_fanout_one_check,
    _prune_fanout_one_build,
)


def _prune_fanout_both_check(g, move, direction, anchor):
    if len(anchor) != 1 or not _is_kind(g, anchor[0], FANOUT):
        return False
    f = anchor[0]
    return (
        _terminated(g, f, "left_out") is not None
        and _terminated(g, f, "right_out") is not None
    )


def _prune_fanout_both_build(sur, move, direction, anchor):
    g = sur.g
    f = anchor[0]
    tl, tr = _terminated(g, f, "left_out"), _terminated(g, f, "right_out")
    t3 = sur.add_node(TERMINATION_GATE, "t")
    sur.patch.info["nodes"] = (f, tl, tr)
    splice(sur, {f, tl, tr}, [(feeder_of(f, "in"), at(NodePort(t3, "in")))])


register_move(
    "prune_fanout_both",
    lambda g, m, d: [(n,) for n in sorted(g.nodes) if _prune_fanout_both_check(g, m, d, (n,))],
    _prune_fanout_both_check,
    _prune_fanout_both_build,
)


# -- loops ---------------------------------------------------------------------

register_move(
    "loop_add",
    lambda g, m, d: [()],
    lambda g, m, d, anchor: anchor == (),
    lambda sur, m, d, anchor: sur.patch.info.update(loop=sur.add_loop()),
)

register_move(
    "loop_remove",
    lambda g, m, d: [(l,) for l in sorted(g.loops)],
    lambda g, m, d, anchor: len(anchor) == 1 and anchor[0] in g.loops,
    lambda sur, m, d, anchor: sur.remove_loop(anchor[0]),
)


# -- emergent algebra moves ------------------------------------------------------


def _r1a_check(g, move, direction, anchor):
    if direction == REVERSE:
        return len(anchor) == 1 and _valid_attachment(g, anchor[0])
    if len(anchor) != 2:
        return False
    f, d = anchor
    if not (_is_kind(g, f, FANOUT) and _is_kind(g, d, DILATION)):
        return False
    if g.nodes[d].coef != move.coef:
        return False
    return g.consumer(f, "left_out") == NodePort(d, "x_in") and g.consumer(
        f, "right_out"
    ) == NodePort(d, "y_in")


def _r1a_enumerate(g, move, direction):
    if direction == REVERSE:
        return [(a,) for a in attachments(g)]
    out = []
    for f in sorted(g.nodes):
        if g.nodes[f].kind != FANOUT:
            continue
        end = g.consumer(f, "left_out")
        if isinstance(end, NodePort) and _r1a_check(g, move, direction, (f, end.node)):
            out.append((f, end.node))
    return out


def _r1a_build(sur, move, direction, anchor):
    if direction == FORWARD:
        f, d = anchor
        sur.patch.info["nodes"] = (f, d)
        splice(sur, {f, d}, [(feeder_of(f, "in"), consumer_of(d, "out"))])
    else:
        f = sur.add_node(FANOUT_GATE)
        d = sur.add_node(dilation_gate(move.coef))
        sur.add_edge(NodePort(f, "left_out"), NodePort(d, "x_in"))
        sur.add_edge(NodePort(f, "right_out"), NodePort(d, "y_in"))
        sur.patch.info["nodes"] = (f, d)
        attach_single(sur, anchor[0], NodePort(f, "in"), NodePort(d, "out"))


register_move("r1a", _r1a_enumerate, _r1a_check, _r1a_build)


def _r1b_check(g, move, direction, anchor):
    if direction == REVERSE:
        return len(anchor) == 1 and _valid_attachment(g, anchor[0])
    if len(anchor) != 2:
        return False
    d, f = anchor
    if not (_is_kind(g, d, DILATION) and _is_kind(g, f, FANOUT)):
        return False
    if g.nodes[d].coef != move.coef:
        return False
    return g.consumer(d, "out") == NodePort(f, "in") and g.consumer(
        f, "left_out"
    ) == NodePort(d, "y_in")


def _r1b_enumerate(g, move, direction):
    if direction == REVERSE:
        return [(a,) for a in attachments(g)]
    out = []
    for d in sorted(g.nodes):
        if g.nodes[d].kind != DILATION:
            continue
        end = g.consumer(d, "out")
        if isinstance(end, NodePort) and _r1b_check(g, move, direction, (d, end.node)):
            out.append((d, end.node))
    return out


def _r1b_build(sur, move, direction, anchor):
    if direction == FORWARD:
        d, f = anchor
        sur.patch.info["nodes"] = (d, f)
        splice(sur, {d, f}, [(feeder_of(d, "x_in"), consumer_of(f, "right_out"))])
    else:
        d = sur.add_node(dilation_gate(move.coef))
        f = sur.add_node(FANOUT_GATE)
        sur.add_edge(NodePort(d, "out"), NodePort(f, "in"))
        sur.add_edge(NodePort(f, "left_out"), NodePort(d, "y_in"))
        sur.patch.info["nodes"] = (d, f)
        attach_single(sur, anchor[0], NodePort(d, "x_in"), NodePort(f, "right_out"))


register_move("r1b", _r1b_enumerate, _r1b_check, _r1b_build)


def _r2_check(g, move, direction, anchor):
    if direction == REVERSE:
        return (
            len(anchor) == 1
            and _is_kind(g, anchor[0], DILATION)
            and g.nodes[anchor[0]].coef == move.coef * move.coef2
        )
    if len(anchor) != 3:
        return False
    f, d1, d2 = anchor
    if not (_is_kind(g, f, FANOUT) and _is_kind(g, d1, DILATION) and _is_kind(g, d2, DILATION)):
        return False
    if d1 == d2:
        return False
    if g.nodes[d1].coef != move.coef or g.nodes[d2].coef != move.coef2:
        return False
    return (
        g.consumer(f, "left_out") == NodePort(d1, "x_in")
        and g.consumer(f, "right_out") == NodePort(d2, "x_in")
        and g.consumer(d2, "out") == NodePort(d1, "y_in")
    )


def _r2_enumerate(g, move, direction):
    if direction == REVERSE:
        return [(n,) for n in sorted(g.nodes) if _r2_check(g, move, direction, (n,))]
    out = []
    for f in sorted(g.nodes):
        if g.nodes[f].kind != FANOUT:
            continue
        e1, e2 = g.consumer(f, "left_out"), g.consumer(f, "right_out")
        if isinstance(e1, NodePort) and isinstance(e2, NodePort):
            if _r2_check(g, move, direction, (f, e1.node, e2.node)):
                out.append((f, e1.node, e2.node))
    return out


def _r2_build(sur, move, direction, anchor):
    if direction == FORWARD:
        f, d1, d2 = anchor
        d3 = sur.add_node(dilation_gate(move.coef * move.coef2), "d")
        sur.patch.info["nodes"] = (f, d1, d2)
        sur.patch.info["new_node"] = d3
        splice(
            sur,
            {f, d1, d2},
            [
                (feeder_of(f, "in"), at(NodePort(d3, "x_in"))),
                (feeder_of(d2, "y_in"), at(NodePort(d3, "y_in"))),
                (at(NodePort(d3, "out")), consumer_of(d1, "out")),
            ],
        )
    else:
        d3 = anchor[0]
        f = sur.add_node(FANOUT_GATE)
        d1 = sur.add_node(dilation_gate(move.coef), "d")
        d2 = sur.add_node(dilation_gate(move.coef2), "d")
        sur.add_edge(NodePort(f, "left_out"), NodePort(d1, "x_in"))
        sur.add_edge(NodePort(f, "right_out"), NodePort(d2, "x_in"))
        sur.add_edge(NodePort(d2, "out"), NodePort(d1, "y_in"))
        sur.patch.info["nodes"] = (f, d1, d2)
        splice(
            sur,
            {d3},
            [
                (feeder_of(d3, "x_in"), at(NodePort(f, "in"))),
                (feeder_of(d3, "y_in"), at(NodePort(d2, "y_in"))),
                (at(NodePort(d1, "out")), consumer_of(d3, "out")),
            ],
        )


register_move("r2", _r2_enumerate, _r2_check, _r2_build)


def _ext2_check(g, move, direction, anchor):
    if direction == FORWARD:
        return (
            len(anchor) == 1
            and _is_kind(g, anchor[0], DILATION)
            and g.nodes[anchor[0]].coef == ONE
        )
    if len(anchor) != 2:
        return False
    att, t = anchor
    return _valid_attachment(g, att) and _is_kind(g, t, TERMINATION)


def _ext2_enumerate(g, move, direction):
    if direction == FORWARD:
        return [(n,) for n in sorted(g.nodes) if _ext2_check(g, move, direction, (n,))]
    terms = [n for n in sorted(g.nodes) if g.nodes[n].kind == TERMINATION]
    return [
        (att, t)
        for att in attachments(g)
        for t in terms
        if _ext2_check(g, move, direction, (att, t))
    ]


def _ext2_build(sur, move, direction, anchor):
    g = sur.g
    if direction == FORWARD:
        d = anchor[0]
        t = sur.add_node(TERMINATION_GATE, "t")
        sur.patch.info["nodes"] = (d,)
        sur.patch.info["term"] = t
        splice(
            sur,
            {d},
            [
                (feeder_of(d, "y_in"), consumer_of(d, "out")),
                (feeder_of(d, "x_in"), at(NodePort(t, "in"))),
            ],
        )
    else:
        att, t = anchor
        d = sur.add_node(dilation_gate(ONE), "d")
        sur.patch.info["nodes"] = (d,)
        if att == ("edge", g.edge_at(t, "in")):
            # the wire and the termination's feeder share one arrow: the
            # preimage is the dilation with its output fed back into x
            e = g.edges[att[1]]
            sur.remove_node(t)
            sur.remove_edge(att[1])
            sur.add_edge(e.source, NodePort(d, "y_in"))
            sur.add_edge(NodePort(d, "out"), NodePort(d, "x_in"))
            return
        # free the termination's feeder onto the new x input
        splice(sur, {t}, [(feeder_of(t, "in"), at(NodePort(d, "x_in")))])
        attach_single(sur, att, NodePort(d, "y_in"), NodePort(d, "out"))


register_move("ext2", _ext2_enumerate, _ext2_check, _ext2_build)


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def enumerate_matches(g: Graph, move: MoveKind, direction: str = FORWARD) -> list[Site]:
    """All Sites where (move, direction) applies, duplicate-free, in a
    deterministic order."""
    if direction not in (FORWARD, REVERSE):
        raise ValueError(f"bad direction {direction!r}")
    if direction == REVERSE and not move.bidirectional():
        return []
    handler = _HANDLERS[move.name]
    return [Site(move, direction, tuple(a) if isinstance(a, (list, tuple)) else (a,))
            for a in handler["enumerate"](g, move, direction)]


def check_site(g: Graph, site: Site) -> bool:
    handler = _HANDLERS[site.move.name]
    try:
        return bool(handler["check"](g, site.move, site.direction, site.anchor))
    except GraphError:
        return False


def apply_move(g: Graph, site: Site) -> tuple[Graph, Patch]:
    """Apply a move at a site, returning the rewritten graph and its Patch.

    Everything outside the matched pattern is untouched (ids preserved).
    """
    if site.direction == REVERSE and not site.move.bidirectional():
        raise DirectionForbidden(f"{site.move.name} goes in one direction only")
    if site.direction not in (FORWARD, REVERSE):
        raise ValueError(f"bad direction {site.direction!r}")
    handler = _HANDLERS[site.move.name]
    if not check_site(g, site):
        raise SiteStale(f"site no longer matches: {site}")
    sur = _Surgery(g)
    handler["build"](sur, site.move, site.direction, site.anchor)
    return apply_patch(g, sur.patch), sur.patch


def inverse_site(site: Site, patch: Patch) -> Site | None:
    """The site applying the opposite direction at the produced location.

    None when the move is one-directional or the inverse is not locatable.
    """
    move, info = site.move, patch.info
    if not move.bidirectional():
        return None
    if move.name in ("beta", "beta_star", "ext_beta"):
        if site.direction == FORWARD:
            a1, a2 = info["arrows"]
            order = 0
            if a1 == a2 and a1[0] == "edge":
                chain = dict(info["chain_order"])[a1[1]]
                order = 0 if chain[0] == 0 else 1
            return Site(move, REVERSE, (a1, a2, order))
        return Site(move, FORWARD, (info["anchor_edge"],))
    if move.name == "co_comm":
        other = REVERSE if site.direction == FORWARD else FORWARD
        return Site(move, other, site.anchor)
    if move.name == "co_assoc":
        other = REVERSE if site.direction == FORWARD else FORWARD
        return Site(move, other, (info["anchor_edge"],))
    if move.name in ("r1a", "r1b"):
        if site.direction == FORWARD:
            return Site(move, REVERSE, (info["arrows"][0],))
        return Site(move, FORWARD, info["nodes"])
    if move.name == "r2":
        if site.direction == FORWARD:
            return Site(move, REVERSE, (info["new_node"],))
        return Site(move, FORWARD, info["nodes"])
    if move.name == "ext2":
        if site.direction == FORWARD:
            return Site(move, REVERSE, (info["arrows"][0], info["term"]))
        d = info["nodes"][0]
        return Site(move, FORWARD, (d,))
    if move.name in ("global_fanout", "local_fanout", "ext1"):
        if site.direction == FORWARD:
            if move.name == "ext1":
                return Site(move, REVERSE, (info["arrows"][0],))
            return Site(move, REVERSE, (info["left_edge"], info["right_edge"]))
        if move.name == "ext1":
            return Site(move, FORWARD, info["nodes"])
        return Site(move, FORWARD, (info["anchor_edge"],))
    return None


# -- scripts -------------------------------------------------------------------


@dataclass(frozen=True)
class ScriptStep:
    """One scripted application; the selector must resolve to one site.

    selector: None (site must be globally unique), {"anchor": <anchor tuple
    or single id>} (structural address), or {"nth": k} (k-th site in
    enumeration order).
    """

    move: MoveKind
    direction: str = FORWARD
    selector: dict | None = None


def resolve_selector(g: Graph, step: ScriptStep, index: int | None = None) -> Site:
    sel = step.selector or {}
    if "anchor" in sel:
        raw = sel["anchor"]
        anchor = tuple(raw) if isinstance(raw, (list, tuple)) else (raw,)
        site = Site(step.move, step.direction, anchor)
        if check_site(g, site):
            return site
        # fall back: treat a single id as "contained in the anchor"
        if not isinstance(raw, (list, tuple)):
            sites = [
                s
                for s in enumerate_matches(g, step.move, step.direction)
                if raw in s.anchor
            ]
            if len(sites) == 1:
                return sites[0]
            if len(sites) > 1:
                raise SelectorAmbiguous(
                    f"anchor {raw!r} matches {len(sites)} sites", step=index
                )
        raise SelectorEmpty(f"no site at anchor {raw!r}", step=index)
    sites = enumerate_matches(g, step.move, step.direction)
    if "nth" in sel:
        if not 0 <= sel["nth"] < len(sites):
            raise SelectorEmpty(
                f"nth={sel['nth']} out of range ({len(sites)} sites)", step=index
            )
        return sites[sel["nth"]]
    if not sites:
        raise SelectorEmpty(f"no sites for {step.move} {step.direction}", step=index)
    if len(sites) > 1:
        raise SelectorAmbiguous(
            f"{len(sites)} sites for {step.move} {step.direction}", step=index
        )
    return sites[0]


def apply_script(
    g: Graph, script: list[ScriptStep]
) -> tuple[Graph, list[tuple[Site, Patch]]]:
    """Run a move script, returning the final graph and the per-step trace."""
    trace: list[tuple[Site, Patch]] = []
    for i, step in enumerate(script):
        site = resolve_selector(g, step, index=i)
        g, patch = apply_move(g, site)
        trace.append((site, patch))
    return g, trace
