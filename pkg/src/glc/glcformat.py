"""The .glc text format.

One statement per line::

    glc 1                          (optional version header)
    node <id> lambda|app|fanout|term
    node <id> dilation <coef>
    edge <id>.<port> -> <id>.<port>
    in <name> -> <id>.<port>
    out <id>.<port> -> <name>
    loop <n>

Coefficients are ``1`` or ``*``-joined ``sym^int`` factors (``a^1*b^-2``).
``#`` starts a comment. The printer is deterministic; parse∘print is the
identity on graphs whose edge and loop ids are already canonical (``e0``…,
``l0``…), and node ids and leaf names always survive the round trip.
"""

from __future__ import annotations

from .coeff import Coefficient
from .graph import (
    APP_GATE,
    DILATION,
    FANOUT_GATE,
    LAMBDA_GATE,
    TERMINATION_GATE,
    Graph,
    GraphError,
    InputLeaf,
    NodePort,
    OutputLeaf,
    build,
    dilation_gate,
)

VERSION = "glc 1"

_PLAIN_KINDS = {
    "lambda": LAMBDA_GATE,
    "app": APP_GATE,
    "fanout": FANOUT_GATE,
    "term": TERMINATION_GATE,
}


class GlcSyntaxError(GraphError):
    code = "SYNTAX_ERROR"

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _split_port(ref: str, line: int) -> tuple[str, str]:
    if "." not in ref:
        raise GlcSyntaxError(f"expected <id>.<port>, got {ref!r}", line)
    node, port = ref.rsplit(".", 1)
    if not node or not port:
        raise GlcSyntaxError(f"expected <id>.<port>, got {ref!r}", line)
    return node, port


def parse_glc(text: str) -> Graph:
    nodes: list[tuple[str, object]] = []
    edges: list[tuple[object, object]] = []
    loops = 0
    seen_nodes: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        head = words[0]
        if head == "glc":
            if words[1:] != ["1"]:
                raise GlcSyntaxError(f"unsupported version {line!r}", lineno)
            continue
        if head == "node":
            if len(words) < 3:
                raise GlcSyntaxError("node statement needs an id and a kind", lineno)
            nid, kind = words[1], words[2]
            if nid in seen_nodes:
                raise GlcSyntaxError(f"node {nid!r} declared twice", lineno)
            seen_nodes.add(nid)
            if kind == "dilation":
                if len(words) != 4:
                    raise GlcSyntaxError("dilation needs a coefficient", lineno)
                try:
                    coef = Coefficient.parse(words[3])
                except ValueError as exc:
                    raise GlcSyntaxError(str(exc), lineno) from None
                nodes.append((nid, dilation_gate(coef)))
            elif kind in _PLAIN_KINDS:
                if len(words) != 3:
                    raise GlcSyntaxError(f"{kind} takes no arguments", lineno)
                nodes.append((nid, _PLAIN_KINDS[kind]))
            else:
                raise GlcSyntaxError(f"unknown gate kind {kind!r}", lineno)
        elif head == "edge":
            if len(words) != 4 or words[2] != "->":
                raise GlcSyntaxError("expected: edge <id>.<port> -> <id>.<port>", lineno)
            src = NodePort(*_split_port(words[1], lineno))
            tgt = NodePort(*_split_port(words[3], lineno))
            edges.append((src, tgt))
        elif head == "in":
            if len(words) != 4 or words[2] != "->":
                raise GlcSyntaxError("expected: in <name> -> <id>.<port>", lineno)
            edges.append((InputLeaf(words[1]), NodePort(*_split_port(words[3], lineno))))
        elif head == "out":
            if len(words) != 4 or words[2] != "->":
                raise GlcSyntaxError("expected: out <id>.<port> -> <name>", lineno)
            edges.append((NodePort(*_split_port(words[1], lineno)), OutputLeaf(words[3])))
        elif head == "wire":
            if len(words) != 4 or words[2] != "->":
                raise GlcSyntaxError("expected: wire <name> -> <name>", lineno)
            edges.append((InputLeaf(words[1]), OutputLeaf(words[3])))
        elif head == "loop":
            if len(words) != 2 or not words[1].isdigit():
                raise GlcSyntaxError("expected: loop <count>", lineno)
            loops += int(words[1])
        else:
            raise GlcSyntaxError(f"unknown statement {head!r}", lineno)
    return build(nodes=nodes, edges=edges, loops=loops)


def print_glc(g: Graph) -> str:
    lines = [VERSION]
    for nid in sorted(g.nodes):
        kind = g.nodes[nid]
        if kind.kind == DILATION:
            lines.append(f"node {nid} dilation {kind.coef}")
        else:
            lines.append(f"node {nid} {kind.kind}")
    for eid in sorted(g.edges, key=lambda e: (len(e), e)):
        e = g.edges[eid]
        if isinstance(e.source, NodePort) and isinstance(e.target, NodePort):
            lines.append(f"edge {e.source} -> {e.target}")
        elif isinstance(e.source, InputLeaf) and isinstance(e.target, NodePort):
            lines.append(f"in {e.source.leaf} -> {e.target}")
        elif isinstance(e.source, NodePort):
            lines.append(f"out {e.source} -> {e.target.leaf}")
        else:
            lines.append(f"wire {e.source.leaf} -> {e.target.leaf}")
    if g.loops:
        lines.append(f"loop {len(g.loops)}")
    return "\n".join(lines) + "\n"
