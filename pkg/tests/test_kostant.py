import pytest

from bggkit.catalog import load_example
from bggkit.field import Scalar
from bggkit.kostant import FormSpaces, cohomology, q_polynomial, verify_q_polynomial
from bggkit.lie import adjoint_representation
from helpers import form_spaces


def q_of(geometry, rep):
    return [str(c) for c in q_polynomial(form_spaces(geometry, rep)).coefficients]


def test_form_space_dimensions():
    fs = form_spaces("projective-heis", "standard")
    assert [fs.dim(d) for d in range(4)] == [4, 12, 12, 4]


def test_codifferential_squares_to_zero():
    fs = form_spaces("g2-rolling", "standard")
    for degree in (2, 3):
        assert (fs.codifferential_matrix(degree - 1) @ fs.codifferential_matrix(degree)).is_zero()


def test_differential_squares_to_zero():
    fs = form_spaces("path-ode", "dual")
    assert (fs.differential_matrix(1) @ fs.differential_matrix(0)).is_zero()


def test_q_standard_and_alt2():
    assert q_of("projective-heis", "standard") == ["1/3"]
    assert q_of("projective-heis", "alt2") == ["1/2"]


def test_q_adjoint_is_cubic():
    g = load_example("projective-heis").g_data
    q = q_polynomial(FormSpaces(g, adjoint_representation(g)))
    assert [str(c) for c in q.coefficients] == ["3/2", "-9/16", "1/16"]
    assert verify_q_polynomial(q, FormSpaces(g, adjoint_representation(g)))


def test_splitting_coefficients_are_negated_q():
    q = q_polynomial(form_spaces("projective-heis", "standard"))
    assert q.splitting_coefficients() == [Scalar.parse("-1/3")]


@pytest.mark.parametrize("geometry,rep,h0", [("projective-heis", "standard", 3), ("projective-heis", "dual", 1),
                                             ("path-ode", "standard", 2), ("g2-rolling", "standard", 1)])
def test_zeroth_cohomology(geometry, rep, h0):
    assert cohomology(form_spaces(geometry, rep), 0).dim == h0


def test_image_inside_kernel():
    fs = form_spaces("cr-tube", "adjoint")
    for degree in (1, 2):
        assert fs.codifferential_kernel(degree).contains(fs.codifferential_image(degree))
