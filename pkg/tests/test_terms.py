import pytest

from glc.terms import (
    TIMEOUT,
    App,
    Lam,
    TermSyntaxError,
    Var,
    alpha_equal,
    free_vars,
    parse,
    show,
    size,
    term_normalize,
)


def test_parse_identity():
    assert parse("\\x.x") == Lam("x", Var("x"))
    assert parse("λx.x") == Lam("x", Var("x"))


def test_parse_omega():
    omega = parse("(\\x.x x)(\\x.x x)")
    assert omega == App(
        Lam("x", App(Var("x"), Var("x"))), Lam("x", App(Var("x"), Var("x")))
    )


def test_parse_application_left_associative():
    assert parse("f a b") == App(App(Var("f"), Var("a")), Var("b"))


def test_parse_lambda_body_extends_right():
    assert parse("\\x.f x") == Lam("x", App(Var("f"), Var("x")))


def test_parse_multi_binder_sugar():
    assert parse("\\x y.x") == Lam("x", Lam("y", Var("x")))


def test_parse_errors():
    for bad in ["\\x.", "(", "a )", "\\.x", ""]:
        with pytest.raises(TermSyntaxError):
            parse(bad)


def test_show_round_trip():
    for text in ["\\x.x", "(\\x.x x) (\\y.y y)", "f a b", "\\f.\\x.f (f x)", "x (y z)"]:
        t = parse(text)
        assert parse(show(t)) == t


def test_alpha_equality():
    assert alpha_equal(parse("\\x.x"), parse("\\y.y"))
    assert not alpha_equal(parse("\\x.x"), parse("\\x.\\y.x"))
    # free variables must match by name
    assert not alpha_equal(Var("a"), Var("b"))
    assert alpha_equal(parse("\\x.a"), parse("\\z.a"))


def test_free_vars_and_size():
    t = parse("\\x.x y")
    assert free_vars(t) == {"y"}
    assert size(t) == 4


def test_normalize_identity_application():
    assert alpha_equal(term_normalize(parse("(\\x.x) y")), Var("y"))


def test_normalize_k_combinator():
    t = parse("(\\x.\\y.x) a b")
    assert alpha_equal(term_normalize(t), Var("a"))


def test_normalize_omega_times_out():
    omega = parse("(\\x.x x)(\\x.x x)")
    assert term_normalize(omega, fuel=50) is TIMEOUT


def test_normal_order_discards_divergence():
    t = parse("(\\x.y) ((\\x.x x)(\\x.x x))")
    assert alpha_equal(term_normalize(t, fuel=5), Var("y"))


def test_capture_avoidance():
    # (\f.\x. f x) x  -> \x'. x x'  (outer free x must not be captured)
    t = parse("(\\f.\\x.f x) x")
    result = term_normalize(t)
    assert isinstance(result, Lam)
    assert free_vars(result) == {"x"}
    assert alpha_equal(result, Lam("z", App(Var("x"), Var("z"))))


def test_church_arithmetic():
    two = parse("\\f.\\x.f (f x)")
    plus = parse("\\m.\\n.\\f.\\x.m f (n f x)")
    four = term_normalize(App(App(plus, two), two), fuel=100)
    assert alpha_equal(four, parse("\\f.\\x.f (f (f (f x)))"))
