"""Shared graph builders for the move tests, and the acceptance summary."""

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

from glc.coeff import Coefficient
from glc.graph import (
    APP_GATE,
    FANOUT_GATE,
    LAMBDA_GATE,
    TERMINATION_GATE,
    InputLeaf,
    NodePort,
    OutputLeaf,
    build,
    dilation_gate,
)

EPS = Coefficient.of("a")
MU = Coefficient.of("b")


def wire(src="w_in", tgt="w_out"):
    return build(edges=[(InputLeaf(src), OutputLeaf(tgt))])


def two_wires():
    return build(
        edges=[
            (InputLeaf("in_A"), OutputLeaf("out_B")),
            (InputLeaf("in_D"), OutputLeaf("out_C")),
        ]
    )


def eta_cycle_closed():
    """The fully closed λ–∧ graph: A.out→L.in, L.var→A.arg, L.term→A.fun."""
    return build(
        nodes=[("L", LAMBDA_GATE), ("A", APP_GATE)],
        edges=[
            (NodePort("A", "out"), NodePort("L", "in")),
            (NodePort("L", "var_out"), NodePort("A", "arg_in")),
            (NodePort("L", "term_out"), NodePort("A", "fun_in")),
        ],
    )


def identity_into(target_kind, extra_nodes=(), extra_edges=()):
    """λx.x (one lambda, var feeding back) wired solely into a gate input."""
    nodes = [("L", LAMBDA_GATE)] + list(extra_nodes)
    edges = [
        (NodePort("L", "var_out"), NodePort("L", "in")),
        (NodePort("L", "term_out"), target_kind),
    ] + list(extra_edges)
    return build(nodes=nodes, edges=edges)


def r1a_lhs(coef=EPS, s="s", t="t"):
    return build(
        nodes=[("F", FANOUT_GATE), ("D", dilation_gate(coef))],
        edges=[
            (InputLeaf(s), NodePort("F", "in")),
            (NodePort("F", "left_out"), NodePort("D", "x_in")),
            (NodePort("F", "right_out"), NodePort("D", "y_in")),
            (NodePort("D", "out"), OutputLeaf(t)),
        ],
    )


def r2_lhs(eps=EPS, mu=MU):
    return build(
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


def r2_rhs(eps=EPS, mu=MU):
    return build(
        nodes=[("D", dilation_gate(eps * mu))],
        edges=[
            (InputLeaf("s"), NodePort("D", "x_in")),
            (InputLeaf("v"), NodePort("D", "y_in")),
            (NodePort("D", "out"), OutputLeaf("t")),
        ],
    )
