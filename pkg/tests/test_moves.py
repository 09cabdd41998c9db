import itertools

import pytest

from conftest import EPS, MU, eta_cycle_closed, r1a_lhs, r2_lhs, r2_rhs, two_wires, wire
from glc.coeff import ONE, Coefficient
from glc.encoding import encode
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
    validate,
)
from glc.iso import canonical_key, is_isomorphic
from glc.moves import (
    FORWARD,
    REVERSE,
    DirectionForbidden,
    MoveKind,
    ScriptStep,
    SelectorAmbiguous,
    SelectorEmpty,
    Site,
    SiteStale,
    apply_move,
    apply_patch,
    apply_script,
    beta,
    beta_star,
    enumerate_matches,
    ext_beta,
    inverse_site,
    r1a,
    r2,
    revert_patch,
)
from glc.terms import parse


def test_beta_forward_on_identity_application():
    g = encode(parse("(\\x.x) y"))
    sites = enumerate_matches(g, beta(), FORWARD)
    assert len(sites) == 1
    h, _ = apply_move(g, sites[0])
    assert validate(h) == []
    assert is_isomorphic(h, encode(parse("y")))
    # the wire keeps the free variable's leaf name
    assert is_isomorphic(h, encode(parse("y")), match_leaf_names=True)


def test_beta_forward_no_sites_on_wire():
    assert enumerate_matches(wire(), beta(), FORWARD) == []


def test_beta_reverse_sites_on_wire_match_brute_force():
    g = wire()
    sites = enumerate_matches(g, beta(), REVERSE)
    # one edge: the same-edge pair in its two orders
    assert len(sites) == 2
    outcomes = {canonical_key(apply_move(g, s)[0]) for s in sites}
    assert len(outcomes) == 2


def test_beta_reverse_wire_then_forward_round_trips():
    g = wire()
    for site in enumerate_matches(g, beta(), REVERSE):
        h, patch = apply_move(g, site)
        assert validate(h) == []
        assert len(h.nodes) == 2
        back_site = inverse_site(site, patch)
        k, _ = apply_move(h, back_site)
        assert is_isomorphic(k, g)


def test_beta_reverse_then_patch_revert_is_identity():
    g = wire()
    site = enumerate_matches(g, beta(), REVERSE)[0]
    h, patch = apply_move(g, site)
    assert revert_patch(h, patch) == g


def test_beta_on_closed_eta_cycle_gives_two_loops():
    g = eta_cycle_closed()
    sites = enumerate_matches(g, beta(), FORWARD)
    assert len(sites) == 1
    h, _ = apply_move(g, sites[0])
    assert h.stats() == {"nodes": 0, "edges": 0, "loops": 2}


def test_beta_reverse_on_loop_then_forward_gives_one_loop():
    g = build(loops=1)
    sites = enumerate_matches(g, beta(), REVERSE)
    assert len(sites) == 1  # one cyclic pair per loop
    h, patch = apply_move(g, sites[0])
    assert len(h.nodes) == 2 and len(h.edges) == 3 and not h.loops
    back = inverse_site(sites[0], patch)
    k, _ = apply_move(h, back)
    assert k.stats() == {"nodes": 0, "edges": 0, "loops": 1}


def test_beta_reverse_two_wires_labelling_dependence():
    g = two_wires()
    e1 = g.leaf_edge("in", "in_A")
    e2 = g.leaf_edge("in", "in_D")
    s12 = Site(beta(), REVERSE, (("edge", e1), ("edge", e2), 0))
    s21 = Site(beta(), REVERSE, (("edge", e2), ("edge", e1), 0))
    h12, _ = apply_move(g, s12)
    h21, _ = apply_move(g, s21)
    # unnamed they coincide; the labelling shows up with leaves matched
    assert is_isomorphic(h12, h21)
    assert not is_isomorphic(h12, h21, match_leaf_names=True)
    assert h12.feeder("n0", "in") == InputLeaf("in_A")
    assert h21.feeder("n0", "in") == InputLeaf("in_D")


def test_patch_apply_and_revert_by_ids():
    g = encode(parse("(\\x.x) y"))
    site = enumerate_matches(g, beta(), FORWARD)[0]
    h, patch = apply_move(g, site)
    assert revert_patch(h, patch) == g
    assert apply_patch(g, patch) == h


def test_site_from_other_graph_is_stale():
    g = encode(parse("(\\x.x) y"))
    site = enumerate_matches(g, beta(), FORWARD)[0]
    other = wire()
    with pytest.raises(SiteStale):
        apply_move(other, site)


def test_locality_outside_pattern_untouched():
    g = encode(parse("(\\x.x) ((\\y.y) z)"))
    site = enumerate_matches(g, beta(), FORWARD)
    order_site = min(site, key=lambda s: s.anchor)
    h, patch = apply_move(g, order_site)
    untouched = set(g.nodes) - set(patch.removed_nodes)
    assert untouched <= set(h.nodes)
    for eid in set(g.edges) - set(patch.removed_edges):
        assert h.edges[eid] == g.edges[eid]


# -- dual and extended beta -----------------------------------------------------


def _beta_star_lhs(coef=EPS):
    return build(
        nodes=[("F", FANOUT_GATE), ("D", dilation_gate(coef))],
        edges=[
            (InputLeaf("one"), NodePort("F", "in")),
            (NodePort("F", "left_out"), NodePort("D", "x_in")),
            (InputLeaf("four"), NodePort("D", "y_in")),
            (NodePort("D", "out"), OutputLeaf("three")),
            (NodePort("F", "right_out"), OutputLeaf("two")),
        ],
    )


def test_beta_star_forward_connects_one_three_four_two():
    g = _beta_star_lhs()
    sites = enumerate_matches(g, beta_star(EPS), FORWARD)
    assert len(sites) == 1
    h, _ = apply_move(g, sites[0])
    assert len(h.nodes) == 0 and len(h.edges) == 2
    srcs = {e.source.leaf: e.target.leaf for e in h.edges.values()}
    assert srcs == {"one": "three", "four": "two"}


def test_beta_star_requires_matching_coefficient():
    g = _beta_star_lhs(EPS)
    assert enumerate_matches(g, beta_star(MU), FORWARD) == []


def _ext_beta_lhs(coef=EPS):
    return build(
        nodes=[
            ("L", LAMBDA_GATE),
            ("A", APP_GATE),
            ("F", FANOUT_GATE),
            ("D", dilation_gate(coef)),
        ],
        edges=[
            (InputLeaf("one"), NodePort("L", "in")),
            (NodePort("L", "term_out"), NodePort("A", "fun_in")),
            (NodePort("A", "out"), NodePort("F", "in")),
            (NodePort("F", "left_out"), NodePort("D", "x_in")),
            (NodePort("L", "var_out"), NodePort("D", "y_in")),
            (InputLeaf("two"), NodePort("A", "arg_in")),
            (NodePort("D", "out"), OutputLeaf("three")),
            (NodePort("F", "right_out"), OutputLeaf("four")),
        ],
    )


def test_ext_beta_forward_connects_one_three_two_four():
    g = _ext_beta_lhs()
    sites = enumerate_matches(g, ext_beta(EPS), FORWARD)
    assert len(sites) == 1
    h, _ = apply_move(g, sites[0])
    assert len(h.nodes) == 0 and len(h.edges) == 2
    pairs = {e.source.leaf: e.target.leaf for e in h.edges.values()}
    assert pairs == {"one": "three", "two": "four"}


def test_ext_beta_lhs_beta_reduces_to_emergent_crossing():
    g = _ext_beta_lhs()
    h, _ = apply_move(g, enumerate_matches(g, beta(), FORWARD)[0])
    expected = build(
        nodes=[("F", FANOUT_GATE), ("D", dilation_gate(EPS))],
        edges=[
            (InputLeaf("x"), NodePort("F", "in")),
            (NodePort("F", "left_out"), NodePort("D", "x_in")),
            (InputLeaf("y"), NodePort("D", "y_in")),
            (NodePort("D", "out"), OutputLeaf("o1")),
            (NodePort("F", "right_out"), OutputLeaf("o2")),
        ],
    )
    assert is_isomorphic(h, expected)


def test_ext_beta_lhs_beta_star_reduces_to_lambda_pattern():
    g = _ext_beta_lhs()
    h, _ = apply_move(g, enumerate_matches(g, beta_star(EPS), FORWARD)[0])
    expected = build(
        nodes=[("L", LAMBDA_GATE), ("A", APP_GATE)],
        edges=[
            (InputLeaf("x"), NodePort("L", "in")),
            (NodePort("L", "term_out"), NodePort("A", "fun_in")),
            (InputLeaf("y"), NodePort("A", "arg_in")),
            (NodePort("A", "out"), OutputLeaf("o1")),
            (NodePort("L", "var_out"), OutputLeaf("o2")),
        ],
    )
    assert is_isomorphic(h, expected)


def test_ext_beta_equivalence_both_routes_agree():
    g = _ext_beta_lhs()
    direct, _ = apply_move(g, enumerate_matches(g, ext_beta(EPS), FORWARD)[0])
    step1, _ = apply_move(g, enumerate_matches(g, beta_star(EPS), FORWARD)[0])
    step2, _ = apply_move(step1, enumerate_matches(step1, beta(), FORWARD)[0])
    assert is_isomorphic(direct, step2, match_leaf_names=True)


# -- fan-out moves ----------------------------------------------------------------


def _fan_fixture():
    return build(
        nodes=[("F", FANOUT_GATE)],
        edges=[
            (InputLeaf("s"), NodePort("F", "in")),
            (NodePort("F", "left_out"), OutputLeaf("p")),
            (NodePort("F", "right_out"), OutputLeaf("q")),
        ],
    )


def test_co_comm_swaps_outputs_and_is_self_inverse():
    g = _fan_fixture()
    site = enumerate_matches(g, MoveKind("co_comm"), FORWARD)[0]
    h, patch = apply_move(g, site)
    assert h.consumer("F", "left_out") == OutputLeaf("q")
    assert h.consumer("F", "right_out") == OutputLeaf("p")
    back = inverse_site(site, patch)
    k, _ = apply_move(h, back)
    assert is_isomorphic(k, g, match_leaf_names=True)


def test_co_assoc_rotates_tree_and_inverts():
    g = build(
        nodes=[("P", FANOUT_GATE), ("Q", FANOUT_GATE)],
        edges=[
            (InputLeaf("s"), NodePort("P", "in")),
            (NodePort("P", "left_out"), NodePort("Q", "in")),
            (NodePort("Q", "left_out"), OutputLeaf("a")),
            (NodePort("Q", "right_out"), OutputLeaf("b")),
            (NodePort("P", "right_out"), OutputLeaf("c")),
        ],
    )
    move = MoveKind("co_assoc")
    site = enumerate_matches(g, move, FORWARD)[0]
    h, patch = apply_move(g, site)
    assert h.consumer("P", "left_out") == OutputLeaf("a")
    assert h.consumer("Q", "left_out") == OutputLeaf("b")
    assert h.consumer("Q", "right_out") == OutputLeaf("c")
    assert h.consumer("P", "right_out") == NodePort("Q", "in")
    back = inverse_site(site, patch)
    k, _ = apply_move(h, back)
    assert is_isomorphic(k, g, match_leaf_names=True)
    assert revert_patch(h, patch) == g


# -- pruning ----------------------------------------------------------------------


def test_prune_app():
    g = build(
        nodes=[("A", APP_GATE), ("T", TERMINATION_GATE)],
        edges=[
            (InputLeaf("f"), NodePort("A", "fun_in")),
            (InputLeaf("x"), NodePort("A", "arg_in")),
            (NodePort("A", "out"), NodePort("T", "in")),
        ],
    )
    site = enumerate_matches(g, MoveKind("prune_app"), FORWARD)[0]
    h, _ = apply_move(g, site)
    assert len(h.nodes) == 2
    assert all(k.kind == "term" for k in h.nodes.values())
    assert validate(h) == []


def test_prune_lambda():
    g = build(
        nodes=[("L", LAMBDA_GATE), ("T1", TERMINATION_GATE), ("T2", TERMINATION_GATE)],
        edges=[
            (InputLeaf("b"), NodePort("L", "in")),
            (NodePort("L", "term_out"), NodePort("T1", "in")),
            (NodePort("L", "var_out"), NodePort("T2", "in")),
        ],
    )
    site = enumerate_matches(g, MoveKind("prune_lambda"), FORWARD)[0]
    h, _ = apply_move(g, site)
    assert len(h.nodes) == 1 and next(iter(h.nodes.values())).kind == "term"


def test_prune_fanout_one_wires_through():
    g = build(
        nodes=[("F", FANOUT_GATE), ("T", TERMINATION_GATE)],
        edges=[
            (InputLeaf("s"), NodePort("F", "in")),
            (NodePort("F", "left_out"), NodePort("T", "in")),
            (NodePort("F", "right_out"), OutputLeaf("o")),
        ],
    )
    site = enumerate_matches(g, MoveKind("prune_fanout_one"), FORWARD)[0]
    h, _ = apply_move(g, site)
    assert h.stats() == {"nodes": 0, "edges": 1, "loops": 0}
    e = next(iter(h.edges.values()))
    assert (e.source, e.target) == (InputLeaf("s"), OutputLeaf("o"))


def test_prune_fanout_one_self_feedback_becomes_loop():
    g = build(
        nodes=[("F", FANOUT_GATE), ("T", TERMINATION_GATE)],
        edges=[
            (NodePort("F", "right_out"), NodePort("F", "in")),
            (NodePort("F", "left_out"), NodePort("T", "in")),
        ],
    )
    site = enumerate_matches(g, MoveKind("prune_fanout_one"), FORWARD)[0]
    h, _ = apply_move(g, site)
    assert h.stats() == {"nodes": 0, "edges": 0, "loops": 1}


def test_pruning_rejects_reverse():
    g = build(
        nodes=[("A", APP_GATE), ("T", TERMINATION_GATE)],
        edges=[
            (InputLeaf("f"), NodePort("A", "fun_in")),
            (InputLeaf("x"), NodePort("A", "arg_in")),
            (NodePort("A", "out"), NodePort("T", "in")),
        ],
    )
    assert enumerate_matches(g, MoveKind("prune_app"), REVERSE) == []
    with pytest.raises(DirectionForbidden):
        apply_move(g, Site(MoveKind("prune_app"), REVERSE, ("e2",)))


def test_loop_moves():
    g = build()
    h, patch = apply_move(g, Site(MoveKind("loop_add"), FORWARD, ()))
    assert len(h.loops) == 1
    back_sites = enumerate_matches(h, MoveKind("loop_remove"), FORWARD)
    k, _ = apply_move(h, back_sites[0])
    assert k.stats() == {"nodes": 0, "edges": 0, "loops": 0}
    assert revert_patch(h, patch) == g


# -- emergent moves ---------------------------------------------------------------


def test_r1a_forward_gives_wire():
    g = r1a_lhs()
    site = enumerate_matches(g, r1a(EPS), FORWARD)[0]
    h, patch = apply_move(g, site)
    assert h.stats() == {"nodes": 0, "edges": 1, "loops": 0}
    e = next(iter(h.edges.values()))
    assert (e.source, e.target) == (InputLeaf("s"), OutputLeaf("t"))
    back = inverse_site(site, patch)
    k, _ = apply_move(h, back)
    assert is_isomorphic(k, g)


def test_r1b_forward_gives_wire():
    g = build(
        nodes=[("D", dilation_gate(EPS)), ("F", FANOUT_GATE)],
        edges=[
            (InputLeaf("s"), NodePort("D", "x_in")),
            (NodePort("D", "out"), NodePort("F", "in")),
            (NodePort("F", "left_out"), NodePort("D", "y_in")),
            (NodePort("F", "right_out"), OutputLeaf("t")),
        ],
    )
    site = enumerate_matches(g, MoveKind("r1b", coef=EPS), FORWARD)[0]
    h, _ = apply_move(g, site)
    assert h.stats() == {"nodes": 0, "edges": 1, "loops": 0}


def test_r2_forward_composes_coefficients():
    g = r2_lhs()
    site = enumerate_matches(g, r2(EPS, MU), FORWARD)[0]
    h, patch = apply_move(g, site)
    assert is_isomorphic(h, r2_rhs(), match_leaf_names=True)
    back = inverse_site(site, patch)
    k, _ = apply_move(h, back)
    assert is_isomorphic(k, g, match_leaf_names=True)


def test_r2_reverse_needs_composed_coefficient():
    g = r2_rhs()  # carries a^1*b^1
    assert enumerate_matches(g, r2(EPS, MU), REVERSE) != []
    assert enumerate_matches(g, r2(EPS, EPS), REVERSE) == []


def test_ext2_forward_identity_dilation():
    g = build(
        nodes=[("D", dilation_gate(ONE))],
        edges=[
            (InputLeaf("x"), NodePort("D", "x_in")),
            (InputLeaf("y"), NodePort("D", "y_in")),
            (NodePort("D", "out"), OutputLeaf("o")),
        ],
    )
    site = enumerate_matches(g, MoveKind("ext2"), FORWARD)[0]
    h, patch = apply_move(g, site)
    # y wired through; x terminated
    assert len(h.nodes) == 1 and next(iter(h.nodes.values())).kind == "term"
    wires = [e for e in h.edges.values() if isinstance(e.source, InputLeaf) and isinstance(e.target, OutputLeaf)]
    assert len(wires) == 1 and wires[0].source.leaf == "y"
    back = inverse_site(site, patch)
    k, _ = apply_move(h, back)
    assert is_isomorphic(k, g, match_leaf_names=True)


def test_ext2_requires_identity_coefficient():
    g = r1a_lhs(EPS)
    assert enumerate_matches(g, MoveKind("ext2"), FORWARD) == []


def test_ext2_on_identity_termination_gadget():
    g = build(
        nodes=[("D", dilation_gate(ONE))],
        edges=[
            (InputLeaf("x"), NodePort("D", "x_in")),
            (NodePort("D", "out"), NodePort("D", "y_in")),
        ],
    )
    site = enumerate_matches(g, MoveKind("ext2"), FORWARD)[0]
    h, _ = apply_move(g, site)
    # the feedback closes into a loop; the input lands on a termination
    assert h.stats() == {"nodes": 1, "edges": 1, "loops": 1}
    assert next(iter(h.nodes.values())).kind == "term"


# -- scripts ----------------------------------------------------------------------


def test_apply_script_empty_returns_input():
    g = wire()
    h, trace = apply_script(g, [])
    assert h == g and trace == []


def test_apply_script_runs_unique_beta():
    g = encode(parse("(\\x.x) y"))
    h, trace = apply_script(g, [ScriptStep(beta())])
    assert is_isomorphic(h, encode(parse("y")))
    assert len(trace) == 1


def test_apply_script_selector_errors_carry_step_index():
    g = encode(parse("(\\x.x) ((\\y.y) z)"))
    with pytest.raises(SelectorAmbiguous) as exc:
        apply_script(g, [ScriptStep(beta())])
    assert exc.value.step == 0
    with pytest.raises(SelectorEmpty) as exc:
        apply_script(
            g,
            [
                ScriptStep(beta(), selector={"nth": 0}),
                ScriptStep(beta(), selector={"nth": 0}),
                ScriptStep(MoveKind("prune_dilation")),
            ],
        )
    assert exc.value.step == 2


def test_enumeration_is_duplicate_free():
    g = encode(parse("(\\x.x x) (\\y.y y)"))
    for name in ("beta", "co_comm", "prune_app"):
        move = MoveKind(name)
        for direction in (FORWARD, REVERSE):
            sites = enumerate_matches(g, move, direction)
            assert len(sites) == len(set(sites))
