import pytest

from glc.coeff import Coefficient
from glc.graph import (
    APP_GATE,
    FANOUT_GATE,
    LAMBDA_GATE,
    TERMINATION_GATE,
    BadAnchor,
    DanglingPort,
    DuplicatePort,
    Edge,
    Graph,
    InputLeaf,
    NodePort,
    NotIsolated,
    OutputLeaf,
    UnknownNode,
    UnknownPort,
    build,
    component_through,
    dilation_gate,
    reachable,
    validate,
)


def test_empty_build():
    g = build()
    assert g.stats() == {"nodes": 0, "edges": 0, "loops": 0}
    assert validate(g) == []


def test_single_wire_is_legal():
    g = build(edges=[(InputLeaf("x"), OutputLeaf("y"))])
    assert g.stats() == {"nodes": 0, "edges": 1, "loops": 0}
    assert g.wires() == ["e0"]


def test_lone_lambda_completed_with_leaves():
    g = build(
        nodes=[("L", LAMBDA_GATE)],
        edges=[
            (InputLeaf("a"), NodePort("L", "in")),
            (NodePort("L", "var_out"), OutputLeaf("v")),
            (NodePort("L", "term_out"), OutputLeaf("t")),
        ],
    )
    assert validate(g) == []
    assert g.feeder("L", "in") == InputLeaf("a")


def test_dangling_port_rejected():
    with pytest.raises(DanglingPort):
        build(nodes=[("L", LAMBDA_GATE)], edges=[(InputLeaf("a"), NodePort("L", "in"))])


def test_duplicate_port_rejected():
    with pytest.raises(DuplicatePort):
        build(
            nodes=[("T", TERMINATION_GATE)],
            edges=[
                (InputLeaf("a"), NodePort("T", "in")),
                (InputLeaf("b"), NodePort("T", "in")),
            ],
        )


def test_unknown_port_rejected():
    with pytest.raises(UnknownPort):
        build(
            nodes=[("T", TERMINATION_GATE)],
            edges=[(NodePort("T", "out"), OutputLeaf("x"))],
        )


def test_orientation_must_be_respected():
    # an input port cannot source an edge
    with pytest.raises(DanglingPort):
        build(
            nodes=[("L", LAMBDA_GATE)],
            edges=[
                (NodePort("L", "in"), OutputLeaf("x")),
                (InputLeaf("a"), NodePort("L", "var_out")),
                (NodePort("L", "term_out"), OutputLeaf("t")),
            ],
        )


def test_validate_reports_violations_as_data():
    g = Graph(
        {"T": TERMINATION_GATE},
        {
            "e0": Edge(InputLeaf("a"), NodePort("T", "in")),
            "e1": Edge(InputLeaf("b"), NodePort("T", "in")),
        },
        set(),
    )
    codes = {v.code for v in validate(g)}
    assert "DUPLICATE_PORT" in codes


def _chain():
    # A -> B -> C through dilation gates
    eps = Coefficient.of("a")
    return build(
        nodes=[("A", dilation_gate(eps)), ("B", dilation_gate(eps)), ("C", dilation_gate(eps))],
        edges=[
            (InputLeaf("i1"), NodePort("A", "x_in")),
            (InputLeaf("i2"), NodePort("A", "y_in")),
            (NodePort("A", "out"), NodePort("B", "x_in")),
            (InputLeaf("i3"), NodePort("B", "y_in")),
            (NodePort("B", "out"), NodePort("C", "x_in")),
            (InputLeaf("i4"), NodePort("C", "y_in")),
            (NodePort("C", "out"), OutputLeaf("o")),
        ],
    )


def test_reachable_follows_orientation():
    g = _chain()
    assert reachable(g, "A", "C")
    assert not reachable(g, "C", "A")
    with pytest.raises(UnknownNode):
        reachable(g, "A", "Z")


def test_reachable_on_eta_counterexample():
    g = build(
        nodes=[("L", LAMBDA_GATE), ("A", APP_GATE)],
        edges=[
            (NodePort("A", "out"), NodePort("L", "in")),
            (NodePort("L", "var_out"), NodePort("A", "arg_in")),
            (NodePort("L", "term_out"), NodePort("A", "fun_in")),
        ],
    )
    assert reachable(g, "L", "A")
    assert reachable(g, "A", "L")
    assert reachable(g, "A", "A")


def test_component_through_identity_into_fanout():
    # lambda identity (var_out feeding back to in) wired solely into a fan-out
    g = build(
        nodes=[("L", LAMBDA_GATE), ("F", FANOUT_GATE)],
        edges=[
            (NodePort("L", "var_out"), NodePort("L", "in")),
            (NodePort("L", "term_out"), NodePort("F", "in")),
            (NodePort("F", "left_out"), OutputLeaf("p")),
            (NodePort("F", "right_out"), OutputLeaf("q")),
        ],
    )
    e = g.edge_at("L", "term_out")
    assert component_through(g, e) == {"L"}


def test_component_with_leaf_arrows_is_not_isolated():
    eps = Coefficient.of("a")
    g = build(
        nodes=[("D", dilation_gate(eps)), ("T", TERMINATION_GATE)],
        edges=[
            (InputLeaf("x"), NodePort("D", "x_in")),
            (InputLeaf("y"), NodePort("D", "y_in")),
            (NodePort("D", "out"), NodePort("T", "in")),
        ],
    )
    with pytest.raises(NotIsolated) as exc:
        component_through(g, g.edge_at("D", "out"))
    assert len(exc.value.boundary) == 2


def test_component_second_connection_is_not_isolated():
    g = build(
        nodes=[("L", LAMBDA_GATE), ("F", FANOUT_GATE), ("T", TERMINATION_GATE)],
        edges=[
            (NodePort("L", "var_out"), NodePort("L", "in")),
            (NodePort("L", "term_out"), NodePort("F", "in")),
            (NodePort("F", "left_out"), NodePort("T", "in")),
            (NodePort("F", "right_out"), OutputLeaf("q")),
        ],
    )
    # component through F.left_out -> T.in contains F, which also feeds q and is fed by L
    with pytest.raises(NotIsolated):
        component_through(g, g.edge_at("F", "left_out"))


def test_component_bad_anchor():
    g = _chain()
    with pytest.raises(BadAnchor):
        component_through(g, g.edge_at("A", "out"))
    with pytest.raises(BadAnchor):
        component_through(g, "missing")


def test_reachable_agrees_with_floyd_warshall():
    import random

    from glc.graph import NodePort as NP

    rng = random.Random(31)
    for _ in range(20):
        n = rng.randrange(2, 31)
        eps = Coefficient.of("a")
        nodes = [(f"n{i}", dilation_gate(eps)) for i in range(n)]
        outs = [(nid, "out") for nid, _ in nodes]
        ins = [(nid, p) for nid, _ in nodes for p in ("x_in", "y_in")]
        rng.shuffle(outs)
        rng.shuffle(ins)
        edges = []
        step = {}
        while outs and ins and rng.random() < 0.8:
            s, t = outs.pop(), ins.pop()
            edges.append((NP(*s), NP(*t)))
            step.setdefault(s[0], set()).add(t[0])
        for i, (nid, p) in enumerate(outs):
            edges.append((NP(nid, p), OutputLeaf(f"o{i}")))
        for i, (nid, p) in enumerate(ins):
            edges.append((InputLeaf(f"i{i}"), NP(nid, p)))
        g = build(nodes=nodes, edges=edges)

        ids = [nid for nid, _ in nodes]
        closure = {a: {b: b in step.get(a, ()) for b in ids} for a in ids}
        for k in ids:
            for a in ids:
                for b in ids:
                    closure[a][b] = closure[a][b] or (closure[a][k] and closure[k][b])
        for a in ids:
            for b in ids:
                assert reachable(g, a, b) == closure[a][b], (a, b)
