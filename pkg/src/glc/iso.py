"""Graph equality: backtracking isomorphism and canonical hashing.

Two deliberately independent routes. ``is_isomorphic`` searches for an
explicit node bijection; ``canonical_key`` computes a digest by iterative
partition refinement with backtracking individualization. Leaves are
unnumbered by default, so any boundary matching of like-oriented leaves is
accepted; scenario comparisons can opt into leaf-name matching.
"""

from __future__ import annotations

import hashlib
from collections import Counter

from .graph import Graph, InputLeaf, NodePort, OutputLeaf

_PORT_IDX_CACHE: dict[tuple, dict[str, int]] = {}


def _port_idx(kind) -> dict[str, int]:
    key = kind.ports()
    cached = _PORT_IDX_CACHE.get(key)
    if cached is None:
        cached = {p: i for i, (p, _) in enumerate(key)}
        _PORT_IDX_CACHE[key] = cached
    return cached


def _kind_token(kind) -> str:
    return str(kind)


def _wire_names(g: Graph) -> Counter:
    out: Counter = Counter()
    for eid in g.wires():
        e = g.edges[eid]
        out[(e.source.leaf, e.target.leaf)] += 1
    return out


# -- explicit bijection search -----------------------------------------------


def _local_signature(g: Graph, n: str, match_leaf_names: bool) -> tuple:
    """Port-by-port view of a node's surroundings, bijection-invariant."""
    kind = g.nodes[n]
    descr = []
    for port, direction in kind.ports():
        e = g.edges[g.edge_at(n, port)]
        far = e.source if direction == "in" else e.target
        if isinstance(far, NodePort):
            farkind = _kind_token(g.nodes[far.node])
            descr.append(("n", farkind, far.port, far.node == n and far.port == port))
        elif isinstance(far, InputLeaf):
            descr.append(("lin", far.leaf if match_leaf_names else "", "", False))
        else:
            descr.append(("lout", far.leaf if match_leaf_names else "", "", False))
    return (_kind_token(kind), tuple(descr))


def is_isomorphic(g1: Graph, g2: Graph, match_leaf_names: bool = False) -> bool:
    """True iff a bijection of nodes/edges/loops preserves kinds (with
    coefficients), port names, orientation and loop count."""
    if len(g1.nodes) != len(g2.nodes) or len(g1.edges) != len(g2.edges):
        return False
    if len(g1.loops) != len(g2.loops):
        return False
    if Counter(map(_kind_token, g1.nodes.values())) != Counter(
        map(_kind_token, g2.nodes.values())
    ):
        return False
    if match_leaf_names:
        if _wire_names(g1) != _wire_names(g2):
            return False
    elif len(g1.wires()) != len(g2.wires()):
        return False

    sig1 = {n: _local_signature(g1, n, match_leaf_names) for n in g1.nodes}
    sig2 = {n: _local_signature(g2, n, match_leaf_names) for n in g2.nodes}
    if Counter(sig1.values()) != Counter(sig2.values()):
        return False

    # most-constrained-first: rare signatures early
    freq = Counter(sig1.values())
    order = sorted(g1.nodes, key=lambda n: (freq[sig1[n]], repr(sig1[n]), n))
    candidates = {
        n: [m for m in g2.nodes if sig2[m] == sig1[n]] for n in g1.nodes
    }

    mapping: dict[str, str] = {}
    used: set[str] = set()

    def consistent(n1: str, n2: str) -> bool:
        kind = g1.nodes[n1]
        for port, direction in kind.ports():
            e1 = g1.edges[g1.edge_at(n1, port)]
            e2 = g2.edges[g2.edge_at(n2, port)]
            far1 = e1.source if direction == "in" else e1.target
            far2 = e2.source if direction == "in" else e2.target
            if isinstance(far1, NodePort):
                if not isinstance(far2, NodePort) or far1.port != far2.port:
                    return False
                m = mapping.get(far1.node)
                if m is not None and m != far2.node:
                    return False
                if m is None and far2.node in used:
                    return False
                if (far1.node == n1) != (far2.node == n2):
                    return False
            elif isinstance(far1, InputLeaf):
                if not isinstance(far2, InputLeaf):
                    return False
                if match_leaf_names and far1.leaf != far2.leaf:
                    return False
            else:
                if not isinstance(far2, OutputLeaf):
                    return False
                if match_leaf_names and far1.leaf != far2.leaf:
                    return False
        return True

    def search(i: int) -> bool:
        if i == len(order):
            return True
        n1 = order[i]
        for n2 in candidates[n1]:
            if n2 in used:
                continue
            if consistent(n1, n2):
                mapping[n1] = n2
                used.add(n2)
                if search(i + 1):
                    return True
                del mapping[n1]
                used.discard(n2)
        return False

    return search(0)


# -- canonical hashing --------------------------------------------------------


def _refine_subset(
    g: Graph, coloring: dict[str, int], match_leaf_names: bool
) -> dict[str, int]:
    """Iteratively split color classes by port-ordered neighborhoods.

    Operates on the nodes present in ``coloring``; far endpoints must lie
    inside that set (true for connected components).
    """
    ncolors = len(set(coloring.values()))
    while True:
        sigs: dict[str, tuple] = {}
        for n in coloring:
            kind = g.nodes[n]
            descr = []
            for port, direction in kind.ports():
                e = g.edges[g.edge_at(n, port)]
                far = e.source if direction == "in" else e.target
                if isinstance(far, NodePort):
                    descr.append((0, coloring[far.node], _port_idx(g.nodes[far.node])[far.port]))
                elif isinstance(far, InputLeaf):
                    descr.append((1, far.leaf if match_leaf_names else "", -1))
                else:
                    descr.append((2, far.leaf if match_leaf_names else "", -1))
            sigs[n] = (coloring[n], tuple(descr))
        ranked = {s: i for i, s in enumerate(sorted(set(sigs.values()), key=repr))}
        new = {n: ranked[sigs[n]] for n in coloring}
        nnew = len(set(new.values()))
        if nnew == ncolors:
            return new
        coloring, ncolors = new, nnew


def _subgraph_certificate(g: Graph, idx: dict[str, int], match_leaf_names: bool) -> bytes:
    parts: list = []
    for n in sorted(idx, key=idx.__getitem__):
        parts.append(("N", idx[n], _kind_token(g.nodes[n])))
    edge_rows = []
    boundary_rows = []
    for e in g.edges.values():
        src_in = isinstance(e.source, NodePort) and e.source.node in idx
        tgt_in = isinstance(e.target, NodePort) and e.target.node in idx
        if src_in and tgt_in:
            edge_rows.append(
                (
                    idx[e.source.node],
                    _port_idx(g.nodes[e.source.node])[e.source.port],
                    idx[e.target.node],
                    _port_idx(g.nodes[e.target.node])[e.target.port],
                )
            )
        elif src_in:
            boundary_rows.append(
                (
                    idx[e.source.node],
                    _port_idx(g.nodes[e.source.node])[e.source.port],
                    "out",
                    e.target.leaf if match_leaf_names else "",
                )
            )
        elif tgt_in:
            boundary_rows.append(
                (
                    idx[e.target.node],
                    _port_idx(g.nodes[e.target.node])[e.target.port],
                    "in",
                    e.source.leaf if match_leaf_names else "",
                )
            )
    parts.append(("E", tuple(sorted(edge_rows))))
    parts.append(("B", tuple(sorted(boundary_rows))))
    return hashlib.sha256(repr(parts).encode()).digest()


def _components(g: Graph) -> list[set[str]]:
    """Node sets connected through node-to-node edges."""
    seen: set[str] = set()
    out: list[set[str]] = []
    adj: dict[str, set[str]] = {n: set() for n in g.nodes}
    for e in g.edges.values():
        if isinstance(e.source, NodePort) and isinstance(e.target, NodePort):
            adj[e.source.node].add(e.target.node)
            adj[e.target.node].add(e.source.node)
    for start in g.nodes:
        if start in seen:
            continue
        comp = {start}
        stack = [start]
        while stack:
            n = stack.pop()
            for m in adj[n]:
                if m not in comp:
                    comp.add(m)
                    stack.append(m)
        seen |= comp
        out.append(comp)
    return out


def _component_cert(g: Graph, comp: set[str], match_leaf_names: bool) -> bytes:
    init_tokens = sorted({_kind_token(g.nodes[n]) for n in comp})
    rank = {t: i for i, t in enumerate(init_tokens)}
    coloring = {n: rank[_kind_token(g.nodes[n])] for n in comp}
    coloring = _refine_subset(g, coloring, match_leaf_names)

    best: list[bytes | None] = [None]

    def grow(coloring: dict[str, int]) -> None:
        cells: dict[int, list[str]] = {}
        for n, c in coloring.items():
            cells.setdefault(c, []).append(n)
        split = None
        for c in sorted(cells):
            if len(cells[c]) > 1:
                split = cells[c]
                break
        if split is None:
            cert = _subgraph_certificate(g, coloring, match_leaf_names)
            if best[0] is None or cert < best[0]:
                best[0] = cert
            return
        for v in sorted(split):
            # place v in a fresh class ahead of its cell, then re-refine
            shifted = {
                n: (c * 2 + 2 if n != v else coloring[v] * 2 + 1)
                for n, c in coloring.items()
            }
            grow(_refine_subset(g, shifted, match_leaf_names))

    grow(coloring)
    assert best[0] is not None
    return best[0]


def canonical_key(g: Graph, match_leaf_names: bool = False) -> bytes:
    """Digest equal for isomorphic graphs and unequal otherwise.

    Each connected component is canonicalized by partition refinement over
    (kind, port-labeled neighborhoods) with backtracking individualization
    on ties (certificate = minimum over the search tree); the graph key
    hashes the sorted component certificates plus wires and loop count.
    """
    certs = sorted(
        _component_cert(g, comp, match_leaf_names) for comp in _components(g)
    )
    if match_leaf_names:
        wires = tuple(sorted(_wire_names(g).items()))
    else:
        wires = len(g.wires())
    blob = repr((certs, wires, len(g.loops))).encode()
    return hashlib.sha256(blob).digest()
