import pytest

from glc.coeff import ONE, Coefficient


def test_identity_prints_as_one():
    assert str(ONE) == "1"
    assert ONE.is_identity()


def test_parse_round_trip():
    for text in ["1", "a^1", "a^1*b^-2", "eps^3"]:
        assert str(Coefficient.parse(text)) == text


def test_parse_shorthand_and_merge():
    assert Coefficient.parse("a") == Coefficient.of("a")
    assert Coefficient.parse("a^1*a^-1") == ONE


def test_multiplication_commutative_associative():
    a = Coefficient.of("a")
    b = Coefficient.of(("b", 2))
    c = Coefficient.of(("a", -1), "c")
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)


def test_inverse_cancels():
    x = Coefficient.parse("a^2*b^-1")
    assert x * x.inverse() == ONE
    assert x.inverse().inverse() == x


def test_no_zero_exponents():
    with pytest.raises(ValueError):
        Coefficient((("a", 0),))
    assert Coefficient.of(("a", 1), ("a", -1)) == ONE


def test_identity_is_neutral():
    x = Coefficient.parse("q^5")
    assert x * ONE == x
    assert ONE * x == x
