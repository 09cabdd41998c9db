"""Free emergent-algebra terms and the decoration soundness oracle.

Dil(ε, x, y) denotes x ∘_ε y in an idempotent right quasigroup family
indexed by an abelian group: x ∘_1 y = y, x ∘_ε (x ∘_μ y) = x ∘_{εμ} y and
x ∘_ε x = x. Decorating an acyclic emergent-sector graph propagates terms
from input leaves to output leaves (the fan-out copies — semantically, via
the fan-out moves); a move is decoration-sound when every surviving output
decorates equally before and after, which this module checks over a
generated graph family.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement

from .coeff import ONE, Coefficient
from .graph import (
    DILATION,
    FANOUT,
    FANOUT_GATE,
    TERMINATION,
    TERMINATION_GATE,
    Graph,
    GraphError,
    InputLeaf,
    NodePort,
    OutputLeaf,
    build,
    dilation_gate,
)
from .moves import FORWARD, MoveKind, Site, apply_move, check_site, enumerate_matches


@dataclass(frozen=True)
class Gen:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Dil:
    coef: Coefficient
    x: "EaTerm"
    y: "EaTerm"

    def __str__(self):
        return f"({self.x} ∘[{self.coef}] {self.y})"


EaTerm = Gen | Dil


def ea_size(t: EaTerm) -> int:
    if isinstance(t, Gen):
        return 1
    return 1 + ea_size(t.x) + ea_size(t.y)


def ea_normalize(t: EaTerm) -> EaTerm:
    """Exhaustive innermost rewriting; terminates since every rule shrinks.

    Rules: Dil(1,x,y) -> y; Dil(ε,x,Dil(μ,x,y)) -> Dil(εμ,x,y) when the
    first arguments agree syntactically after normalization;
    Dil(ε,x,x) -> x.
    """
    if isinstance(t, Gen):
        return t
    x = ea_normalize(t.x)
    y = ea_normalize(t.y)
    coef = t.coef
    while True:
        if coef == ONE:
            return y
        if x == y:
            return x
        if isinstance(y, Dil) and y.x == x:
            coef, y = coef * y.coef, y.y
            continue
        return Dil(coef, x, y)


@dataclass(frozen=True)
class Comparison:
    equal: bool
    decided: bool


def _subterms(t: EaTerm) -> set[EaTerm]:
    if isinstance(t, Gen):
        return {t}
    return {t} | _subterms(t.x) | _subterms(t.y)


def _coefs(t: EaTerm) -> set[Coefficient]:
    if isinstance(t, Gen):
        return set()
    return {t.coef} | _coefs(t.x) | _coefs(t.y)


def _one_step(t: EaTerm, coef_pool, term_pool, limit: int):
    """All terms one forward or backward rule application away."""
    out = set()
    if isinstance(t, Dil):
        # forward at the root
        if t.coef == ONE:
            out.add(t.y)
        if t.x == t.y:
            out.add(t.x)
        if isinstance(t.y, Dil) and t.y.x == t.x:
            out.add(Dil(t.coef * t.y.coef, t.x, t.y.y))
        # backward factorization at the root
        for gamma in coef_pool:
            expanded = Dil(gamma, t.x, Dil(gamma.inverse() * t.coef, t.x, t.y))
            if ea_size(expanded) <= limit:
                out.add(expanded)
        # recurse into children
        for sub in _one_step(t.x, coef_pool, term_pool, limit):
            out.add(Dil(t.coef, sub, t.y))
        for sub in _one_step(t.y, coef_pool, term_pool, limit):
            out.add(Dil(t.coef, t.x, sub))
    # backward expansions applicable to any term
    for x in term_pool:
        expanded = Dil(ONE, x, t)
        if ea_size(expanded) <= limit:
            out.add(expanded)
    for gamma in coef_pool:
        expanded = Dil(gamma, t, t)
        if ea_size(expanded) <= limit:
            out.add(expanded)
    return out


def ea_compare(t1: EaTerm, t2: EaTerm, state_cap: int = 400) -> Comparison:
    """Equality in the free theory: normal forms, then a bounded completion
    search; a saturated search without a bridge is a conservative,
    undecided "not equal"."""
    n1, n2 = ea_normalize(t1), ea_normalize(t2)
    if n1 == n2:
        return Comparison(True, True)
    if isinstance(n1, Gen) and isinstance(n2, Gen):
        return Comparison(False, True)
    limit = 2 * max(ea_size(n1), ea_size(n2))
    coef_pool = _coefs(n1) | _coefs(n2)
    coef_pool |= {c.inverse() for c in set(coef_pool)}
    term_pool = _subterms(n1) | _subterms(n2)
    seen1, seen2 = {n1}, {n2}
    frontier1, frontier2 = {n1}, {n2}
    while (frontier1 or frontier2) and len(seen1) + len(seen2) < state_cap:
        next1 = set()
        for t in frontier1:
            next1 |= _one_step(t, coef_pool, term_pool, limit) - seen1
        next2 = set()
        for t in frontier2:
            next2 |= _one_step(t, coef_pool, term_pool, limit) - seen2
        seen1 |= next1
        seen2 |= next2
        if seen1 & seen2:
            return Comparison(True, True)
        frontier1, frontier2 = next1, next2
    return Comparison(False, False)


def ea_equal(t1: EaTerm, t2: EaTerm) -> bool:
    return ea_compare(t1, t2).equal


class NotEmergentSector(GraphError):
    code = "NOT_EMERGENT_SECTOR"


class CyclicGraph(GraphError):
    code = "CYCLIC_GRAPH"

    def __init__(self, message: str, cycle: list[str] | None = None):
        super().__init__(message)
        self.cycle = cycle or []


def decorate(
    g: Graph, inputs: dict[str, EaTerm] | None = None
) -> dict[str, EaTerm]:
    """Propagate decorations from input leaves to output leaves.

    Fan-outs copy, Dilation(ε) maps (x, y) to Dil(ε, x, y), terminations
    discard, loops are ignored. Input leaves without a supplied term
    decorate as generators named after the leaf.
    """
    kinds = g.gate_kinds()
    bad = sorted(k for k in kinds if k not in (FANOUT, DILATION, TERMINATION))
    if bad:
        raise NotEmergentSector(f"gates outside the emergent sector: {', '.join(bad)}")
    inputs = inputs or {}
    value: dict[str, EaTerm] = {}
    for leaf in g.input_leaves():
        eid = g.leaf_edge("in", leaf)
        value[eid] = inputs.get(leaf, Gen(leaf))

    pending: dict[str, int] = {}
    for n in g.nodes:
        pending[n] = len(g.nodes[n].in_ports())
    for eid in value:
        tgt = g.edges[eid].target
        if isinstance(tgt, NodePort):
            pending[tgt.node] -= 1
    ready = [n for n, k in sorted(pending.items()) if k == 0]
    done: set[str] = set()
    while ready:
        n = ready.pop()
        done.add(n)
        kind = g.nodes[n]
        if kind.kind == TERMINATION:
            continue
        if kind.kind == FANOUT:
            v = value[g.edge_at(n, "in")]
            outs = [("left_out", v), ("right_out", v)]
        else:
            v = Dil(kind.coef, value[g.edge_at(n, "x_in")], value[g.edge_at(n, "y_in")])
            outs = [("out", v)]
        for port, v in outs:
            eid = g.edge_at(n, port)
            value[eid] = v
            tgt = g.edges[eid].target
            if isinstance(tgt, NodePort):
                pending[tgt.node] -= 1
                if pending[tgt.node] == 0:
                    ready.append(tgt.node)
    if len(done) < len(g.nodes):
        stuck = sorted(set(g.nodes) - done)
        cycle = _find_cycle(g, stuck)
        raise CyclicGraph(f"directed cycle through {' -> '.join(cycle)}", cycle=cycle)
    return {
        leaf: value[g.leaf_edge("out", leaf)]
        for leaf in g.output_leaves()
        if g.leaf_edge("out", leaf) in value
    }


def _find_cycle(g: Graph, stuck: list[str]) -> list[str]:
    start = stuck[0]
    seen: list[str] = []
    n = start
    while n not in seen:
        seen.append(n)
        for port in g.nodes[n].out_ports():
            tgt = g.edges[g.edge_at(n, port)].target
            if isinstance(tgt, NodePort) and tgt.node in stuck:
                n = tgt.node
                break
        else:
            return seen
    return seen[seen.index(n):]


# -- the soundness checker -----------------------------------------------------

DEFAULT_PALETTE = (
    ONE,
    Coefficient.of("a"),
    Coefficient.of(("a", -1)),
    Coefficient.of("b"),
    Coefficient.of("a", "b"),
)

CHECKABLE = ("r1a", "r2", "ext2", "co_comm", "co_assoc", "prune_fanout_one")


@dataclass
class Counterexample:
    graph: Graph
    site: Site
    output: str
    before: EaTerm | None
    after: EaTerm | None
    reason: str


@dataclass
class SoundnessReport:
    move: str
    graphs: int
    sites_checked: int
    counterexamples: list[Counterexample]

    @property
    def preserving(self) -> bool:
        return not self.counterexamples


def _exhaustive_graphs(max_nodes: int, palette) -> list[Graph]:
    kinds = [FANOUT_GATE, TERMINATION_GATE] + [dilation_gate(c) for c in palette]
    graphs: list[Graph] = [build()]
    for n in range(1, max_nodes + 1):
        for combo in combinations_with_replacement(range(len(kinds)), n):
            node_list = [(f"n{i}", kinds[k]) for i, k in enumerate(combo)]
            outs = [(nid, p) for nid, gk in node_list for p in gk.out_ports()]
            ins = [(nid, p) for nid, gk in node_list for p in gk.in_ports()]
            for wiring in _wirings(outs, ins):
                used_ins = {t for _, t in wiring}
                used_outs = {s for s, _ in wiring}
                edges: list = [(NodePort(*s), NodePort(*t)) for s, t in wiring]
                for i, (nid, p) in enumerate(o for o in outs if o not in used_outs):
                    edges.append((NodePort(nid, p), OutputLeaf(f"o{i}")))
                for i, (nid, p) in enumerate(t for t in ins if t not in used_ins):
                    edges.append((InputLeaf(f"i{i}"), NodePort(nid, p)))
                g = build(nodes=node_list, edges=edges)
                if _acyclic(g):
                    graphs.append(g)
    return graphs


def _wirings(outs, ins):
    """Every injective partial matching of out-ports to in-ports."""
    if not outs:
        yield []
        return
    first, rest = outs[0], outs[1:]
    for sub in _wirings(rest, ins):
        yield sub
        taken = {t for _, t in sub}
        for t in ins:
            if t not in taken:
                yield [(first, t)] + sub


def _acyclic(g: Graph) -> bool:
    color: dict[str, int] = {}

    def dfs(n: str) -> bool:
        color[n] = 1
        for port in g.nodes[n].out_ports():
            tgt = g.edges[g.edge_at(n, port)].target
            if isinstance(tgt, NodePort):
                c = color.get(tgt.node, 0)
                if c == 1 or (c == 0 and not dfs(tgt.node)):
                    return False
        color[n] = 2
        return True

    return all(color.get(n, 0) == 2 or dfs(n) for n in g.nodes)


def _random_acyclic(rng, n_nodes: int, palette) -> Graph:
    kinds = [FANOUT_GATE, TERMINATION_GATE] + [dilation_gate(c) for c in palette]
    node_list = [(f"n{i}", rng.choice(kinds)) for i in range(n_nodes)]
    edges = []
    used_out, used_in = set(), set()
    # wire only downstream so the result is acyclic by construction
    for i, (nid, gk) in enumerate(node_list):
        for p in gk.out_ports():
            later = [
                (mid, q)
                for mid, mk in node_list[i + 1:]
                for q in mk.in_ports()
                if (mid, q) not in used_in
            ]
            if later and rng.random() < 0.8:
                t = rng.choice(later)
                edges.append((NodePort(nid, p), NodePort(*t)))
                used_out.add((nid, p))
                used_in.add(t)
    oc = ic = 0
    for nid, gk in node_list:
        for p in gk.out_ports():
            if (nid, p) not in used_out:
                edges.append((NodePort(nid, p), OutputLeaf(f"o{oc}")))
                oc += 1
        for p in gk.in_ports():
            if (nid, p) not in used_in:
                edges.append((InputLeaf(f"i{ic}"), NodePort(nid, p)))
                ic += 1
    return build(nodes=node_list, edges=edges)


_FAMILY_CACHE: dict[tuple, list[Graph]] = {}


def _planted(palette) -> list[Graph]:
    """Hosts guaranteed to carry each checkable pattern."""
    out: list[Graph] = []
    for eps in palette:
        out.append(
            build(
                nodes=[("F", FANOUT_GATE), ("D", dilation_gate(eps))],
                edges=[
                    (InputLeaf("s"), NodePort("F", "in")),
                    (NodePort("F", "left_out"), NodePort("D", "x_in")),
                    (NodePort("F", "right_out"), NodePort("D", "y_in")),
                    (NodePort("D", "out"), OutputLeaf("t")),
                ],
            )
        )
        for mu in palette:
            out.append(
                build(
                    nodes=[
                        ("F", FANOUT_GATE),
                        ("D1", dilation_gate(eps)),
                        ("D2", dilation_gate(mu)),
                    ],
                    edges=[
                        (InputLeaf("s"), NodePort("F", "in")),
                        (NodePort("F", "left_out"), NodePort("D1", "x_in")),
                        (NodePort("F", "right_out"), NodePort("D2", "x_in")),
                        (InputLeaf("v"), NodePort("D2", "y_in")),
                        (NodePort("D2", "out"), NodePort("D1", "y_in")),
                        (NodePort("D1", "out"), OutputLeaf("t")),
                    ],
                )
            )
    return out


def emergent_family(
    max_exhaustive: int = 3,
    random_count: int = 200,
    max_random_nodes: int = 8,
    seed: int = 7,
    palette=DEFAULT_PALETTE,
) -> list[Graph]:
    """Acyclic emergent-sector graphs: exhaustive small cores, planted
    pattern hosts, plus a seeded random spread up to ``max_random_nodes``
    nodes."""
    key = (max_exhaustive, random_count, max_random_nodes, seed, palette)
    if key not in _FAMILY_CACHE:
        import random as _random

        graphs = _exhaustive_graphs(max_exhaustive, palette)
        graphs.extend(_planted(palette))
        rng = _random.Random(seed)
        for _ in range(random_count):
            graphs.append(_random_acyclic(rng, rng.randrange(4, max_random_nodes + 1), palette))
        _FAMILY_CACHE[key] = graphs
    return _FAMILY_CACHE[key]


def _family_sites(g: Graph, name: str, palette) -> list[Site]:
    """Forward sites for a move name, coefficients read off the graph."""
    sites: list[Site] = []
    if name in ("co_comm", "co_assoc", "prune_fanout_one"):
        return enumerate_matches(g, MoveKind(name), FORWARD)
    if name == "ext2":
        return enumerate_matches(g, MoveKind("ext2"), FORWARD)
    for n in sorted(g.nodes):
        kind = g.nodes[n]
        if kind.kind != FANOUT:
            continue
        end = g.consumer(n, "left_out")
        if name == "r1a":
            if isinstance(end, NodePort) and g.nodes[end.node].kind == DILATION:
                move = MoveKind("r1a", coef=g.nodes[end.node].coef)
                site = Site(move, FORWARD, (n, end.node))
                if check_site(g, site):
                    sites.append(site)
        elif name == "beta_star":
            if (
                isinstance(end, NodePort)
                and g.nodes[end.node].kind == DILATION
                and end.port == "x_in"
            ):
                move = MoveKind("beta_star", coef=g.nodes[end.node].coef)
                sites.append(Site(move, FORWARD, (g.edge_at(n, "left_out"),)))
        elif name == "r2":
            e2 = g.consumer(n, "right_out")
            if (
                isinstance(end, NodePort)
                and isinstance(e2, NodePort)
                and g.nodes[end.node].kind == DILATION
                and g.nodes[e2.node].kind == DILATION
            ):
                move = MoveKind(
                    "r2", coef=g.nodes[end.node].coef, coef2=g.nodes[e2.node].coef
                )
                site = Site(move, FORWARD, (n, end.node, e2.node))
                if check_site(g, site):
                    sites.append(site)
    return sites


def check_move_soundness(
    move: MoveKind | str,
    family: list[Graph] | None = None,
    palette=DEFAULT_PALETTE,
    state_cap: int = 80,
) -> SoundnessReport:
    """Check decoration preservation for one move over the graph family.

    R1a, R2, Ext2, CoComm, CoAssoc and PruneFanOutOne must preserve every
    surviving output's decoration; the dual beta move is expected to fail
    (its report is informative, not an error).
    """
    name = move.name if isinstance(move, MoveKind) else move
    if name not in CHECKABLE + ("beta_star",):
        raise ValueError(f"{name} is not decoration-checkable")
    family = family if family is not None else emergent_family(palette=palette)
    report = SoundnessReport(name, len(family), 0, [])
    for g in family:
        sites = _family_sites(g, name, palette)
        if not sites:
            continue
        try:
            before = decorate(g)
        except CyclicGraph:
            continue
        for site in sites:
            after_graph, _ = apply_move(g, site)
            report.sites_checked += 1
            try:
                after = decorate(after_graph)
            except CyclicGraph as exc:
                report.counterexamples.append(
                    Counterexample(g, site, "", None, None, f"cyclic after move: {exc}")
                )
                continue
            for leaf, val in sorted(after.items()):
                if leaf not in before:
                    continue
                if not ea_compare(before[leaf], val, state_cap=state_cap).equal:
                    report.counterexamples.append(
                        Counterexample(
                            g,
                            site,
                            leaf,
                            before[leaf],
                            val,
                            "output decoration changed",
                        )
                    )
    return report
