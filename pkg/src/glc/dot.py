"""Deterministic DOT rendering of graphs (identical graphs, identical bytes)."""

from __future__ import annotations

from .graph import DILATION, Graph, InputLeaf, NodePort, OutputLeaf

_SHAPES = {
    "lambda": ("triangle", "λ"),
    "app": ("invtriangle", "∧"),
    "fanout": ("diamond", "Υ"),
    "term": ("square", "⊥"),
}


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(g: Graph) -> str:
    lines = ["digraph glc {", "  rankdir=TB;", "  node [fontsize=11];"]
    for nid in sorted(g.nodes):
        kind = g.nodes[nid]
        if kind.kind == DILATION:
            shape, label = "circle", str(kind.coef)
        else:
            shape, label = _SHAPES[kind.kind]
        lines.append(
            f"  {_quote(nid)} [shape={shape}, label={_quote(label + chr(10) + nid)}];"
        )
    for leaf in g.input_leaves():
        lines.append(f"  {_quote('in:' + leaf)} [shape=plaintext, label={_quote(leaf)}];")
    for leaf in g.output_leaves():
        lines.append(f"  {_quote('out:' + leaf)} [shape=plaintext, label={_quote(leaf)}];")

    def name(end) -> str:
        if isinstance(end, NodePort):
            return _quote(end.node)
        if isinstance(end, InputLeaf):
            return _quote("in:" + end.leaf)
        return _quote("out:" + end.leaf)

    for eid in sorted(g.edges):
        e = g.edges[eid]
        attrs = []
        if isinstance(e.source, NodePort):
            attrs.append(f"taillabel={_quote(e.source.port)}")
        if isinstance(e.target, NodePort):
            attrs.append(f"headlabel={_quote(e.target.port)}")
        attrs.append("labelfontsize=8")
        lines.append(f"  {name(e.source)} -> {name(e.target)} [{', '.join(attrs)}];")
    for lid in sorted(g.loops):
        anchor = _quote("loop:" + lid)
        lines.append(f"  {anchor} [shape=point, style=invis];")
        lines.append(f"  {anchor} -> {anchor};")
    lines.append("}")
    return "\n".join(lines) + "\n"
