import pytest

from bggkit.expr import Polynomial, parse_polynomial, parse_scalar
from bggkit.field import Scalar


def test_parse_linear_forms():
    p = parse_polynomial("1/2*x1 - 3*x2 + i*x3")
    assert p.linear_part(["x1", "x2", "x3"]) == {"x1": Scalar.parse("1/2"), "x2": Scalar(-3), "x3": Scalar(0, 1)}
    assert p.degree() == 1


def test_parse_powers_and_constants():
    p = parse_polynomial("(x + 1)^2")
    assert p == parse_polynomial("x*x + 2*x + 1")
    assert parse_polynomial("r2*r2") == Polynomial.constant(2)
    assert parse_polynomial("sqrt2") == parse_polynomial("r2")


def test_parse_errors():
    for bad in ["", "x +", "(x", "x / y", "x ^ y", "x $ 1"]:
        with pytest.raises(ValueError):
            parse_polynomial(bad)


def test_substitute_evaluate_derivative():
    p = parse_polynomial("x*y + 1/2*x^2")
    assert p.substitute({"y": Scalar(2)}) == parse_polynomial("2*x + 1/2*x^2")
    assert p.derivative("x") == parse_polynomial("y + x")
    assert abs(p.evaluate({"x": 2.0, "y": 3.0}) - 8.0) < 1e-12
    assert p.variables() == {"x", "y"}


def test_str_roundtrip():
    for text in ["1/4*x4*w6", "-x1*m32 + x4*m31", "x3^3 - 1/120*x4", "0"]:
        p = parse_polynomial(text)
        assert parse_polynomial(str(p)) == p


def test_parse_scalar():
    assert parse_scalar("2/3") == Scalar.parse("2/3")
    assert parse_scalar(4) == Scalar(4)
