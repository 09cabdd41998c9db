"""Encoding untyped lambda terms into graphs and back.

One λ gate per abstraction, one ∧ gate per application; a binder's
occurrences are fed from its var exit through a fan-out comb in body
traversal order, an unused binder's var exit takes a termination, free
variables become named input leaves, and the term's root feeds the one
output leaf. ``decode`` inverts this up to fan-out tree shape, assigning a
fresh name at every λ. ``graph_normalize`` drives the untyped lambda
sector's moves to a fixpoint: leftmost beta, sharing resolution by global
fan-out, then pruning and loop removal.
"""

from __future__ import annotations

from dataclasses import dataclass

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
    Graph,
    GraphError,
    InputLeaf,
    NodePort,
    OutputLeaf,
    build,
)
from .moves import FORWARD, MoveKind, Site, apply_move, enumerate_matches
from .terms import TIMEOUT, App, Lam, Term, Timeout, Var, free_vars

LAMBDA_SECTOR_KINDS = {LAMBDA, APP, FANOUT, TERMINATION}
EMERGENT_SECTOR_KINDS = {FANOUT, DILATION, TERMINATION}


@dataclass(frozen=True)
class SectorReport:
    lambda_sector: bool
    emergent_sector: bool
    violations: tuple[str, ...]


def sector_of(g: Graph) -> SectorReport:
    kinds = g.gate_kinds()
    lam_bad = sorted(k for k in kinds if k not in LAMBDA_SECTOR_KINDS)
    ea_bad = sorted(k for k in kinds if k not in EMERGENT_SECTOR_KINDS)
    violations = []
    if lam_bad:
        violations.append(f"gates outside the lambda sector: {', '.join(lam_bad)}")
    if ea_bad:
        violations.append(f"gates outside the emergent sector: {', '.join(ea_bad)}")
    return SectorReport(not lam_bad, not ea_bad, tuple(violations))


class DecodeError(GraphError):
    code = "DECODE_ERROR"


class NotLambdaSector(DecodeError):
    code = "NOT_LAMBDA_SECTOR"


class CyclicDecoration(DecodeError):
    code = "CYCLIC_DECORATION"


class ScopeEscape(DecodeError):
    code = "SCOPE_ESCAPE"


ROOT_LEAF = "@out"


def encode(t: Term) -> Graph:
    """Translate a term into its lambda-sector graph."""
    nodes: list[tuple[str, object]] = []
    edges: list[tuple[object, object]] = []
    counters = {"L": 0, "A": 0, "F": 0, "T": 0}

    def new(prefix: str, gate) -> str:
        nid = f"{prefix}{counters[prefix]}"
        counters[prefix] += 1
        nodes.append((nid, gate))
        return nid

    # occurrence targets per binder, innermost scope last
    scopes: dict[str, list[list]] = {}
    free_occ: dict[str, list] = {}
    free_order: list[str] = []

    def occurs(name: str, target) -> None:
        stack = scopes.get(name)
        if stack:
            stack[-1].append(target)
        else:
            if name not in free_occ:
                free_occ[name] = []
                free_order.append(name)
            free_occ[name].append(target)

    def fan_out(source, targets: list) -> None:
        """Wire one source to each target through a fan-out comb."""
        while len(targets) > 1:
            f = new("F", FANOUT_GATE)
            edges.append((source, NodePort(f, "in")))
            edges.append((NodePort(f, "left_out"), targets.pop(0)))
            source = NodePort(f, "right_out")
        edges.append((source, targets[0]))

    def walk(term: Term, target) -> None:
        """Build the subgraph for ``term`` delivering its value to ``target``."""
        if isinstance(term, Var):
            occurs(term.name, target)
            return
        if isinstance(term, App):
            a = new("A", APP_GATE)
            edges.append((NodePort(a, "out"), target))
            walk(term.fun, NodePort(a, "fun_in"))
            walk(term.arg, NodePort(a, "arg_in"))
            return
        l = new("L", LAMBDA_GATE)
        edges.append((NodePort(l, "term_out"), target))
        scopes.setdefault(term.binder, []).append([])
        walk(term.body, NodePort(l, "in"))
        targets = scopes[term.binder].pop()
        if not scopes[term.binder]:
            del scopes[term.binder]
        if targets:
            fan_out(NodePort(l, "var_out"), targets)
        else:
            tnode = new("T", TERMINATION_GATE)
            edges.append((NodePort(l, "var_out"), NodePort(tnode, "in")))

    walk(t, OutputLeaf(ROOT_LEAF))
    for name in free_order:
        fan_out(InputLeaf(name), free_occ[name])
    return build(nodes=nodes, edges=edges)


def decode(g: Graph) -> Term:
    """Reconstruct a term whose encoding is the given graph, up to fan-out
    tree shape; fresh names are assigned at each λ."""
    report = sector_of(g)
    if not report.lambda_sector:
        raise NotLambdaSector(report.violations[0])
    roots = g.output_leaves()
    if len(roots) != 1:
        raise DecodeError(f"expected exactly one output leaf, found {len(roots)}")
    leaf_names = set(g.input_leaves())
    binder_name: dict[str, str] = {}
    counter = [0]

    def name_for(l: str) -> str:
        if l not in binder_name:
            while True:
                cand = f"v{counter[0]}"
                counter[0] += 1
                if cand not in leaf_names:
                    break
            binder_name[l] = cand
        return binder_name[l]

    memo: dict[object, Term] = {}
    in_progress: set = set()

    def synth(endpoint) -> Term:
        if isinstance(endpoint, InputLeaf):
            return Var(endpoint.leaf)
        key = (endpoint.node, endpoint.port)
        if key in memo:
            return memo[key]
        if key in in_progress:
            raise CyclicDecoration(f"directed cycle through {endpoint}")
        in_progress.add(key)
        kind = g.nodes[endpoint.node].kind
        if kind == LAMBDA and endpoint.port == "var_out":
            term: Term = Var(name_for(endpoint.node))
        elif kind == LAMBDA:
            term = Lam(name_for(endpoint.node), synth(g.feeder(endpoint.node, "in")))
        elif kind == APP:
            term = App(
                synth(g.feeder(endpoint.node, "fun_in")),
                synth(g.feeder(endpoint.node, "arg_in")),
            )
        else:  # fan-out copies its decoration
            term = synth(g.feeder(endpoint.node, "in"))
        in_progress.discard(key)
        memo[key] = term
        return term

    root_edge = g.leaf_edge("out", roots[0])
    result = synth(g.edges[root_edge].source)
    escaped = free_vars(result) & set(binder_name.values())
    if escaped:
        raise ScopeEscape(
            f"binder decoration(s) {sorted(escaped)} reach the root unbound"
        )
    return result


def traversal_order(g: Graph) -> dict[str, int]:
    """Deterministic node order: depth-first backwards from each output
    leaf (inputs in port order), then any unvisited nodes by id."""
    order: dict[str, int] = {}

    def visit(endpoint) -> None:
        if not isinstance(endpoint, NodePort):
            return
        stack = [endpoint.node]
        while stack:
            n = stack.pop()
            if n in order:
                continue
            order[n] = len(order)
            feeders = []
            for port in g.nodes[n].in_ports():
                far = g.feeder(n, port)
                if isinstance(far, NodePort) and far.node not in order:
                    feeders.append(far.node)
            stack.extend(reversed(feeders))

    for leaf in g.output_leaves():
        visit(g.edges[g.leaf_edge("out", leaf)].source)
    for n in sorted(g.nodes):
        if n not in order:
            visit(NodePort(n, g.nodes[n].ports()[0][0]))
    return order


_BETA = MoveKind("beta")
_PRUNES = [
    MoveKind("prune_app"),
    MoveKind("prune_lambda"),
    MoveKind("prune_dilation"),
    MoveKind("prune_fanout_one"),
    MoveKind("prune_fanout_both"),
]


def _leftmost_beta(g: Graph) -> Site | None:
    sites = enumerate_matches(g, _BETA, FORWARD)
    if not sites:
        return None
    order = traversal_order(g)

    def rank(site: Site) -> tuple:
        e = g.edges[site.anchor[0]]
        return (order.get(e.target.node, len(order)), site.anchor[0])

    return min(sites, key=rank)


def graph_normalize(g: Graph, fuel: int = 200) -> Graph | Timeout:
    """Reduce a lambda-sector graph to fixpoint or run out of fuel.

    Strategy per round: leftmost beta; else duplicate one isolated
    component feeding a fan-out (global fan-out); else one pruning move;
    else one global prune; else drop loops.
    """
    report = sector_of(g)
    if not report.lambda_sector:
        raise NotLambdaSector(report.violations[0])
    gf = MoveKind("global_fanout")
    gp = MoveKind("global_prune")
    steps = 0

    while True:
        progressed = False
        site = _leftmost_beta(g)
        if site is not None:
            steps += 1
            if steps > fuel:
                return TIMEOUT
            g, _ = apply_move(g, site)
            progressed = True
        gf_sites = enumerate_matches(g, gf, FORWARD)
        if gf_sites:
            order = traversal_order(g)
            site = min(
                gf_sites,
                key=lambda s: (
                    order.get(g.edges[s.anchor[0]].target.node, len(order)),
                    s.anchor[0],
                ),
            )
            steps += 1
            if steps > fuel:
                return TIMEOUT
            g, _ = apply_move(g, site)
            progressed = True
        for move in _PRUNES:
            sites = enumerate_matches(g, move, FORWARD)
            if sites:
                steps += 1
                if steps > fuel:
                    return TIMEOUT
                g, _ = apply_move(g, sites[0])
                progressed = True
                break
        gp_sites = enumerate_matches(g, gp, FORWARD)
        if gp_sites:
            steps += 1
            if steps > fuel:
                return TIMEOUT
            g, _ = apply_move(g, gp_sites[0])
            progressed = True
        if g.loops:
            steps += 1
            if steps > fuel:
                return TIMEOUT
            g, _ = apply_move(
                g, Site(MoveKind("loop_remove"), FORWARD, (sorted(g.loops)[0],))
            )
            progressed = True
        if not progressed:
            return g
