"""Wire-format site descriptors shared by the CLI and the session service.

A descriptor addresses a site structurally: besides the raw anchor ids (a
hint), it carries a fingerprint of the pattern's local content — gate
kinds, ports, boundary — so a client can re-target the "same" site after
server-side id churn. Resolution prefers the exact anchor when it still
matches and otherwise re-enumerates and matches by fingerprint.
"""

from __future__ import annotations

import hashlib
import json

from .coeff import Coefficient
from .graph import DILATION, Graph, InputLeaf, NodePort, OutputLeaf
from .moves import (
    CATALOG,
    FORWARD,
    REVERSE,
    MoveKind,
    Site,
    SiteStale,
    check_site,
    enumerate_matches,
)


def _endpoint_token(g: Graph, end) -> tuple:
    if isinstance(end, NodePort):
        return ("n", str(g.nodes[end.node]), end.port)
    if isinstance(end, InputLeaf):
        return ("in",)
    return ("out",)


def _anchor_tokens(g: Graph, anchor) -> list:
    out = []
    for part in anchor:
        if isinstance(part, tuple):
            kind, ref = part
            if kind == "edge" and ref in g.edges:
                e = g.edges[ref]
                out.append(("edge", _endpoint_token(g, e.source), _endpoint_token(g, e.target)))
            elif kind == "loop":
                out.append(("loop",))
            else:
                out.append(("?",))
        elif isinstance(part, str) and part in g.nodes:
            kind = g.nodes[part]
            row = ["node", str(kind)]
            for port, direction in kind.ports():
                e = g.edges[g.edge_at(part, port)]
                far = e.source if direction == "in" else e.target
                row.append((port, _endpoint_token(g, far)))
            out.append(tuple(row))
        elif isinstance(part, str) and part in g.edges:
            e = g.edges[part]
            out.append(("edge", _endpoint_token(g, e.source), _endpoint_token(g, e.target)))
        elif isinstance(part, str) and part in g.loops:
            out.append(("loop",))
        else:
            out.append((repr(part),))
    return out


def fingerprint(g: Graph, site: Site) -> str:
    blob = repr(
        (
            site.move.name,
            str(site.move.coef) if site.move.coef else "",
            str(site.move.coef2) if site.move.coef2 else "",
            site.direction,
            _anchor_tokens(g, site.anchor),
        )
    )
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _anchor_label(g: Graph, anchor) -> str:
    bits = []
    for part in anchor:
        if isinstance(part, tuple):
            kind, ref = part
            if kind == "edge" and ref in g.edges:
                bits.append(f"cut {g.edges[ref]}")
            else:
                bits.append(f"cut {kind} {ref}")
        elif isinstance(part, str) and part in g.edges:
            bits.append(f"edge {g.edges[part]}")
        elif isinstance(part, str) and part in g.nodes:
            bits.append(f"{g.nodes[part]} {part}")
        else:
            bits.append(str(part))
    return "; ".join(bits) if bits else "(whole graph)"


def _jsonable(value):
    if isinstance(value, tuple):
        return [_jsonable(v) for v in value]
    return value


def _tupled(value):
    if isinstance(value, list):
        return tuple(_tupled(v) for v in value)
    return value


def pattern_ids(g: Graph, site: Site) -> dict:
    """Node and edge ids of the matched pattern, for client highlighting."""
    nodes: set[str] = set()
    edges: set[str] = set()
    loops: set[str] = set()

    def add_endpoint(end):
        if isinstance(end, NodePort):
            nodes.add(end.node)

    for part in site.anchor:
        if isinstance(part, tuple) and len(part) == 2 and part[0] in ("edge", "loop"):
            kind, ref = part
            if kind == "loop":
                loops.add(ref)
            elif ref in g.edges:
                edges.add(ref)
                add_endpoint(g.edges[ref].source)
                add_endpoint(g.edges[ref].target)
        elif isinstance(part, str) and part in g.edges:
            edges.add(part)
            add_endpoint(g.edges[part].source)
            add_endpoint(g.edges[part].target)
        elif isinstance(part, str) and part in g.nodes:
            nodes.add(part)
    if site.direction == FORWARD and site.move.name == "ext_beta":
        from .moves import _ext_beta_bind

        bound = _ext_beta_bind(g, site.anchor[0], site.move.coef)
        if bound:
            nodes.update(bound)
    # pull in pattern-internal edges between already-matched nodes
    for n in list(nodes):
        for port, _ in g.nodes[n].ports():
            eid = g.edge_at(n, port)
            e = g.edges[eid]
            src_in = isinstance(e.source, NodePort) and e.source.node in nodes
            tgt_in = isinstance(e.target, NodePort) and e.target.node in nodes
            if src_in and tgt_in:
                edges.add(eid)
    return {
        "nodes": sorted(nodes),
        "edges": sorted(edges),
        "loops": sorted(loops),
    }


def site_descriptor(g: Graph, site: Site) -> dict:
    desc = {
        "move": site.move.name,
        "direction": site.direction,
        "anchor": _jsonable(site.anchor),
        "fingerprint": fingerprint(g, site),
        "label": _anchor_label(g, site.anchor),
        "pattern": pattern_ids(g, site),
    }
    params = {}
    if site.move.coef is not None:
        params["coef"] = str(site.move.coef)
    if site.move.coef2 is not None:
        params["coef2"] = str(site.move.coef2)
    if site.move.bound is not None:
        params["bound"] = site.move.bound
    if params:
        desc["params"] = params
    return desc


def move_from_descriptor(desc: dict) -> MoveKind:
    params = desc.get("params", {})
    kwargs = {}
    if "coef" in params:
        kwargs["coef"] = Coefficient.parse(params["coef"])
    if "coef2" in params:
        kwargs["coef2"] = Coefficient.parse(params["coef2"])
    if "bound" in params:
        kwargs["bound"] = int(params["bound"])
    return MoveKind(desc["move"], **kwargs)


def resolve_descriptor(g: Graph, desc: dict) -> Site:
    """Find the current site addressed by a descriptor, or raise SiteStale."""
    try:
        move = move_from_descriptor(desc)
        direction = desc.get("direction", FORWARD)
        anchor = _tupled(desc.get("anchor", []))
    except (KeyError, ValueError, TypeError) as exc:
        raise SiteStale(f"malformed site descriptor: {exc}") from exc
    exact = Site(move, direction, anchor)
    if check_site(g, exact):
        if "fingerprint" not in desc or fingerprint(g, exact) == desc["fingerprint"]:
            return exact
    wanted = desc.get("fingerprint")
    if wanted:
        matches = [
            s
            for s in enumerate_matches(g, move, direction)
            if fingerprint(g, s) == wanted
        ]
        if matches:
            if exact in matches:
                return exact
            return min(matches, key=lambda s: repr(s.anchor))
    raise SiteStale("site no longer present in the current graph")


# -- applicable-move listing -----------------------------------------------------


def graph_coefficients(g: Graph) -> list[Coefficient]:
    seen = {str(k.coef): k.coef for k in g.nodes.values() if k.kind == DILATION}
    seen.setdefault("1", Coefficient.one())
    return [seen[k] for k in sorted(seen)]


def applicable_moves(g: Graph, include_reverse: bool = True, cap: int = 200) -> list[Site]:
    """Every applicable site over the whole catalog, coefficient moves
    instantiated from the coefficients present in the graph (plus the
    identity), each move's list truncated at ``cap``."""
    coefs = graph_coefficients(g)
    moves: list[MoveKind] = [
        MoveKind("beta"),
        MoveKind("co_comm"),
        MoveKind("co_assoc"),
        MoveKind("prune_app"),
        MoveKind("prune_lambda"),
        MoveKind("prune_dilation"),
        MoveKind("prune_fanout_one"),
        MoveKind("prune_fanout_both"),
        MoveKind("loop_add"),
        MoveKind("loop_remove"),
        MoveKind("ext2"),
        MoveKind("global_fanout"),
        MoveKind("global_prune"),
        MoveKind("ext1"),
    ]
    for c in coefs:
        moves += [
            MoveKind("ext_beta", coef=c),
            MoveKind("beta_star", coef=c),
            MoveKind("r1a", coef=c),
            MoveKind("r1b", coef=c),
        ]
    for c1 in coefs:
        for c2 in coefs:
            moves.append(MoveKind("r2", coef=c1, coef2=c2))
    out: list[Site] = []
    for move in moves:
        out.extend(enumerate_matches(g, move, FORWARD)[:cap])
        if include_reverse and CATALOG[move.name][1]:
            out.extend(enumerate_matches(g, move, REVERSE)[:cap])
    return out


def descriptor_json(g: Graph, sites: list[Site]) -> list[dict]:
    return [site_descriptor(g, s) for s in sites]


def graph_json(g: Graph) -> dict:
    from .encoding import sector_of
    from .iso import canonical_key

    def endpoint(end):
        if isinstance(end, NodePort):
            return {"node": end.node, "port": end.port}
        if isinstance(end, InputLeaf):
            return {"input": end.leaf}
        return {"output": end.leaf}

    nodes = []
    for nid in sorted(g.nodes):
        kind = g.nodes[nid]
        row = {"id": nid, "kind": kind.kind}
        if kind.kind == DILATION:
            row["coef"] = str(kind.coef)
        nodes.append(row)
    edges = [
        {
            "id": eid,
            "source": endpoint(g.edges[eid].source),
            "target": endpoint(g.edges[eid].target),
        }
        for eid in sorted(g.edges, key=lambda e: (len(e), e))
    ]
    sector = sector_of(g)
    return {
        "nodes": nodes,
        "edges": edges,
        "loops": sorted(g.loops),
        "inputs": g.input_leaves(),
        "outputs": g.output_leaves(),
        "canonicalKey": canonical_key(g).hex(),
        "sector": {
            "lambda": sector.lambda_sector,
            "emergent": sector.emergent_sector,
        },
    }


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)
