import warnings
from fractions import Fraction

import numpy as np
import pytest

from bggkit.catalog import load_example
from bggkit.coords import (ExactExponentialError, ExpFactor, ExponentialSplit, NumericStabilityWarning,
                           PolynomialMatrix, evaluate_solution, exp_action, factor_exponential, invariant_closure,
                           normal_coordinate_polynomial, restrict, solution_expression)
from bggkit.expr import parse_polynomial
from bggkit.field import ONE, ZERO, Scalar
from bggkit.linalg import ExactMatrix
from helpers import result


def catalog_expression(geometry, rep, value=None):
    b = load_example(geometry)
    r = result(geometry, rep)
    space = r.solutions
    value = value if value is not None else space.combine({i: Scalar(i + 2) for i in range(space.dim)})
    factors = [ExpFactor.from_catalog(f, b.k_data.algebra.names) for f in b.factor_decomposition]
    return solution_expression(r.connection, factors, value, space)


def test_zero_parameter_is_identity():
    conn = result("projective-heis", "dual").connection
    assert exp_action(conn, {0: ONE}, 0) == ExactMatrix.identity(3)
    assert exp_action(conn, {1: ONE}, Fraction(0)) == ExactMatrix.identity(3)


def test_nilpotent_group_property():
    conn = result("path-ode", "dual").connection
    x = {0: ONE, 2: Scalar(2), 3: Scalar(-1)}
    s, t = Fraction(1, 3), Fraction(-5, 2)
    assert exp_action(conn, x, s) @ exp_action(conn, x, t) == exp_action(conn, x, s + t)


def test_nilpotent_derivative_is_minus_phi():
    conn = result("path-ode", "dual").connection
    space = conn and result("path-ode", "dual").solutions
    x = {2: ONE, 0: ONE}
    series = exp_action(conn, x, "t")
    derivative = [[p.derivative("t").substitute({"t": ZERO}).constant_term() for p in row] for row in series.rows]
    assert ExactMatrix.from_dense(derivative) == restrict(conn.apply(x), space).scale(-1)


def test_diagonalizable_split():
    conn = result("projective-heis", "standard").connection
    split = exp_action(conn, {0: ONE}, "x1")
    assert isinstance(split, ExponentialSplit)
    assert sorted(str(lam) for lam, _ in split.terms) == ["-1", "1"]
    x1 = 0.7
    expected = np.array([[np.exp(x1), 0], [np.sinh(x1), np.exp(-x1)]])
    assert np.allclose(split.evaluate(x1), expected, atol=1e-14)
    with pytest.raises(ExactExponentialError):
        split.exact(1)


def test_exact_mode_errors_for_irrational_exponential():
    conn = result("projective-heis", "standard").connection
    with pytest.raises(ExactExponentialError):
        exp_action(conn, {0: ONE}, 1, mode="exact")
    assert isinstance(exp_action(conn, {0: ONE}, 1), np.ndarray)


def test_numeric_matches_scipy_on_catalog_factor():
    expr = catalog_expression("g2-rolling", "alt2")
    point = {p: 0.1 * (k + 1) for k, p in enumerate(expr.parameters)}
    value = evaluate_solution(expr, point)
    assert value.shape == (21,)


def test_numeric_stability_warning():
    conn = result("projective-heis", "standard").connection
    with pytest.warns(NumericStabilityWarning):
        exp_action(conn, {0: ONE}, 50.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        exp_action(conn, {0: ONE}, 5.0)


def test_basis_point_value_at_origin():
    expr = catalog_expression("path-ode", "gl")
    zero = [Fraction(0)] * len(expr.parameters)
    assert evaluate_solution(expr, zero) == expr.basis_point_value


def test_exact_evaluation_of_nilpotent_chart():
    expr = catalog_expression("path-ode", "sym2-dual")
    point = [Fraction(k, 3) for k in range(1, 7)]
    exact = evaluate_solution(expr, point)
    numeric = evaluate_solution(expr, [float(p) for p in point], exact=False)
    dense = np.array([exact.get(i, ZERO).to_complex() for i in range(10)])
    assert np.allclose(dense, numeric, atol=1e-12)


def test_exact_request_for_numeric_factor_fails():
    expr = catalog_expression("projective-heis", "dual")
    with pytest.raises(ExactExponentialError):
        evaluate_solution(expr, [Fraction(1)] * 3, exact=True)


def test_declared_nilpotent_factor_is_verified():
    conn = result("projective-heis", "standard").connection
    with pytest.raises(ValueError):
        factor_exponential(conn, ExpFactor(({0: ONE},), ("x1",), "nilpotent"), result("projective-heis", "standard").solutions)


def test_factor_validation():
    with pytest.raises(ValueError):
        ExpFactor(({0: ONE}, {1: ONE}), ("x1", "x2"), "diagonalizable")
    with pytest.raises(ValueError):
        ExpFactor(({0: ONE},), ("x1",), "unipotent")


def test_invariant_closure_of_solutions_is_itself():
    r = result("cprojective", "hermitian")
    assert invariant_closure(r.connection, r.solutions) == r.solutions


def test_normal_coordinates_zero_vector():
    b = load_example("projective-heis")
    form = normal_coordinate_polynomial(b.alpha, b.rep("dual"), {})
    assert all(p.is_zero() for p in form.components)


def test_normal_coordinates_reject_non_normal():
    b = load_example("path-ode")
    r = result("path-ode", "sym2-dual")
    extra = next(v for v in r.solutions.basis if not r.normal.contains_vector(v))
    with pytest.raises(ValueError):
        normal_coordinate_polynomial(b.alpha, b.rep("sym2-dual"), extra)


def test_normal_coordinates_path_dual():
    b = load_example("path-ode")
    nu = {0: Scalar(2), 1: Scalar(3), 2: Scalar(5)}
    form = normal_coordinate_polynomial(b.alpha, b.rep("dual"), nu)
    assert form.degree <= 3
    assert [str(p) for p in form.projecting_components()] != []


def test_polynomial_matrix_algebra():
    m = PolynomialMatrix([[parse_polynomial("x"), parse_polynomial("1")], [parse_polynomial("0"), parse_polynomial("y")]])
    assert (m @ PolynomialMatrix.identity(2)) == m
    assert m.substitute({"x": Scalar(2), "y": Scalar(3)}) == ExactMatrix.from_dense([[2, 1], [0, 3]])
    with pytest.raises(ValueError):
        m.substitute({"x": Scalar(1)})
