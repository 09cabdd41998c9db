import pytest

from conftest import EPS, r2_lhs
from glc.encoding import encode
from glc.glcformat import GlcSyntaxError, parse_glc, print_glc
from glc.graph import DuplicatePort, validate
from glc.iso import is_isomorphic
from glc.macros import termination_gadget
from glc.scenarios import CATALOG
from glc.terms import parse


def test_loop_statement():
    g = parse_glc("loop 2")
    assert g.stats() == {"nodes": 0, "edges": 0, "loops": 2}


def test_identity_document():
    text = """
    # the identity encoding
    glc 1
    node L0 lambda
    edge L0.var_out -> L0.in
    out L0.term_out -> @out
    """
    g = parse_glc(text)
    assert is_isomorphic(g, encode(parse("\\x.x")), match_leaf_names=True)


def test_termination_gadget_document():
    text = "node d1 dilation 1\nedge d1.out -> d1.y_in\nin x -> d1.x_in\n"
    g = parse_glc(text)
    from glc.coeff import ONE

    assert is_isomorphic(g, termination_gadget(ONE))


def test_round_trip_identity_on_parser_produced_graphs():
    text = print_glc(r2_lhs())
    g = parse_glc(text)
    assert print_glc(g) == text
    assert parse_glc(print_glc(g)) == g


def test_round_trip_scenario_corpus():
    for name, scenario in CATALOG.items():
        g = scenario.build()
        h = parse_glc(print_glc(g))
        assert is_isomorphic(g, h, match_leaf_names=True), name
        assert h.nodes == g.nodes, name


def test_wire_and_coefficient_syntax():
    g = parse_glc("wire a -> b\nnode d dilation a^1*b^-2\nin x -> d.x_in\nin y -> d.y_in\nout d.out -> o")
    assert len(g.wires()) == 1
    assert str(g.nodes["d"].coef) == "a^1*b^-2"
    assert "a^1*b^-2" in print_glc(g)


def test_syntax_errors_carry_line_numbers():
    cases = [
        ("node", 1),
        ("loop x", 1),
        ("glc 2", 1),
        ("node a lambda\nfrob a", 2),
        ("edge a -> b", 1),
        ("node a lambda extra", 1),
        ("node d dilation ^", 1),
        ("node a lambda\nnode a lambda", 2),
    ]
    for text, line in cases:
        with pytest.raises(GlcSyntaxError) as exc:
            parse_glc(text)
        assert exc.value.line == line, text


def test_validation_delegated():
    with pytest.raises(DuplicatePort):
        parse_glc("node t term\nin a -> t.in\nin b -> t.in")


def test_print_is_deterministic():
    g = encode(parse("(\\x.x x) (\\y.y)"))
    assert print_glc(g) == print_glc(parse_glc(print_glc(g)))
