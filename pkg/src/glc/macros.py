"""Crossing macros, the four-gate move patterns and the termination gadget.

Fragments come with named boundary leaves so scenario comparisons can track
strands: "1"/"2" enter, "3"/"4" exit for the move patterns; crossings use
x/y strand names.
"""

from __future__ import annotations

from .coeff import Coefficient
from .graph import (
    APP_GATE,
    FANOUT_GATE,
    LAMBDA_GATE,
    Graph,
    InputLeaf,
    NodePort,
    OutputLeaf,
    build,
    dilation_gate,
)


def lambda_crossing(kind: str = "over") -> Graph:
    """The λ–∧ pattern as a two-strand crossing; the two kinds differ by
    which strand enters the λ gate (the labelling choice of the beta move)."""
    if kind not in ("over", "under"):
        raise ValueError("kind must be 'over' or 'under'")
    x_entry, y_entry = ("in", "arg_in") if kind == "over" else ("arg_in", "in")
    edges = [
        (NodePort("L", "term_out"), NodePort("A", "fun_in")),
        (NodePort("A", "out"), OutputLeaf("x_out" if kind == "over" else "y_out")),
        (NodePort("L", "var_out"), OutputLeaf("y_out" if kind == "over" else "x_out")),
    ]
    if kind == "over":
        edges += [
            (InputLeaf("x_in"), NodePort("L", "in")),
            (InputLeaf("y_in"), NodePort("A", "arg_in")),
        ]
    else:
        edges += [
            (InputLeaf("x_in"), NodePort("A", "arg_in")),
            (InputLeaf("y_in"), NodePort("L", "in")),
        ]
    return build(nodes=[("L", LAMBDA_GATE), ("A", APP_GATE)], edges=edges)


def emergent_crossing(coef: Coefficient, kind: str = "over") -> Graph:
    """The Υ–ε̄ crossing: one strand passes through the fan-out, the other
    exits dilated by ε; the under kind exchanges the strand roles."""
    if kind not in ("over", "under"):
        raise ValueError("kind must be 'over' or 'under'")
    pass_in, dil_in = ("x_in", "y_in") if kind == "over" else ("y_in", "x_in")
    pass_out, dil_out = ("x_out", "y_out") if kind == "over" else ("y_out", "x_out")
    return build(
        nodes=[("F", FANOUT_GATE), ("D", dilation_gate(coef))],
        edges=[
            (InputLeaf(pass_in), NodePort("F", "in")),
            (NodePort("F", "left_out"), NodePort("D", "x_in")),
            (InputLeaf(dil_in), NodePort("D", "y_in")),
            (NodePort("F", "right_out"), OutputLeaf(pass_out)),
            (NodePort("D", "out"), OutputLeaf(dil_out)),
        ],
    )


def ext_beta_lhs(coef: Coefficient) -> Graph:
    """The four-gate extended-move pattern: reducing it by the beta move
    leaves the emergent crossing, by the dual beta move the λ–∧ pattern,
    and by the extended move itself the arrows 1→3 and 2→4."""
    return build(
        nodes=[
            ("L", LAMBDA_GATE),
            ("A", APP_GATE),
            ("F", FANOUT_GATE),
            ("D", dilation_gate(coef)),
        ],
        edges=[
            (InputLeaf("1"), NodePort("L", "in")),
            (NodePort("L", "term_out"), NodePort("A", "fun_in")),
            (NodePort("A", "out"), NodePort("F", "in")),
            (NodePort("F", "left_out"), NodePort("D", "x_in")),
            (NodePort("L", "var_out"), NodePort("D", "y_in")),
            (InputLeaf("2"), NodePort("A", "arg_in")),
            (NodePort("D", "out"), OutputLeaf("3")),
            (NodePort("F", "right_out"), OutputLeaf("4")),
        ],
    )


def dual_ext_beta_lhs(coef: Coefficient) -> Graph:
    """The dual of the extended pattern: gate roles swapped under λ↔Υ and
    ∧↔ε̄ with the ports carried along."""
    return build(
        nodes=[
            ("F", FANOUT_GATE),
            ("D", dilation_gate(coef)),
            ("L", LAMBDA_GATE),
            ("A", APP_GATE),
        ],
        edges=[
            (InputLeaf("1"), NodePort("F", "in")),
            (NodePort("F", "left_out"), NodePort("D", "x_in")),
            (NodePort("D", "out"), NodePort("L", "in")),
            (NodePort("L", "term_out"), NodePort("A", "fun_in")),
            (NodePort("F", "right_out"), NodePort("A", "arg_in")),
            (InputLeaf("2"), NodePort("D", "y_in")),
            (NodePort("A", "out"), OutputLeaf("3")),
            (NodePort("L", "var_out"), OutputLeaf("4")),
        ],
    )


def termination_gadget(coef: Coefficient, external: str = "x_in") -> Graph:
    """A dilation with its output fed back into one input: a one-input,
    zero-output assembly that behaves like the termination gate by
    iterating the dilation endlessly around the feedback loop."""
    if external not in ("x_in", "y_in"):
        raise ValueError("external must be 'x_in' or 'y_in'")
    feedback = "y_in" if external == "x_in" else "x_in"
    return build(
        nodes=[("D", dilation_gate(coef))],
        edges=[
            (InputLeaf("in"), NodePort("D", external)),
            (NodePort("D", "out"), NodePort("D", feedback)),
        ],
    )
