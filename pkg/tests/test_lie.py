import pytest
from hypothesis import given

from bggkit.catalog import load_example
from bggkit.field import ONE, Scalar
from bggkit.lie import (LieAlgebraSpec, StructureError, SymmetryPair, alt2_pairs, build_representation, dual_basis,
                        representation_weights, sym2_pairs, validate_algebra, validate_representation,
                        weight_decomposition)
from helpers import sparse_vectors


def heisenberg():
    return LieAlgebraSpec.from_triples(["e1", "e2", "e3"], [(0, 1, 2, Scalar(-1))])


def test_heisenberg_jacobi_and_bracket():
    h = heisenberg()
    assert validate_algebra(h).ok
    assert h.bracket({0: ONE}, {1: ONE}) == {2: Scalar(-1)}
    assert h.bracket({1: ONE}, {0: ONE}) == {2: ONE}


def test_jacobi_failure_is_reported():
    # [e1,e2]=e3, [e2,e3]=e1, [e1,e3]=e1 is not a Lie algebra
    bad = LieAlgebraSpec.from_triples(["a", "b", "c"], [(0, 1, 2, ONE), (1, 2, 0, ONE), (0, 2, 0, ONE)])
    report = validate_algebra(bad)
    assert not report.ok and report.check == "jacobi"


def test_label_orders():
    assert sym2_pairs(3) == [(0, 0), (0, 1), (1, 1), (0, 2), (1, 2), (2, 2)]
    assert alt2_pairs(4) == [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3)]


def test_projective_grading_and_dimensions():
    g = load_example("projective-heis").g_data
    assert g.dim == 15 and g.depth == 1
    assert len(g.negative_indices) == 3 and len(g.positive_indices) == 3
    assert g.validate().ok


@pytest.mark.parametrize("name,dim,depth", [("g2-rolling", 14, 3), ("path-ode", 15, 2), ("cr-tube", 15, 2)])
def test_catalog_gradings(name, dim, depth):
    g = load_example(name).g_data
    assert (g.dim, g.depth) == (dim, depth)


def test_dual_basis_pairing_is_identity():
    g = load_example("path-ode").g_data
    pairing = dual_basis(g)
    for a, x in enumerate(pairing.quotient_basis):
        for b, z in enumerate(pairing.dual_basis):
            assert g.invariant_form({x: ONE}, z) == (ONE if a == b else Scalar(0))


@pytest.mark.parametrize("ctor", ["dual", "sym2", "alt2", "conjugate"])
def test_constructed_representations_are_homomorphisms(ctor):
    b = load_example("cr-tube")
    rep = build_representation(b.rep("standard"), ctor)
    assert validate_representation(rep, b.g_data.algebra).ok


def test_tensor_representation_is_homomorphism():
    b = load_example("path-ode")
    rep = build_representation(b.rep("standard"), "tensor", b.rep("dual"))
    assert rep.dim == 16
    assert validate_representation(rep, b.g_data.algebra).ok


def test_weights_of_standard_projective():
    b = load_example("projective-heis")
    weights = representation_weights(b.rep("standard"), b.g_data)
    assert [w.to_fraction() for w in weights] == [Scalar.parse("3/4").to_fraction()] + [Scalar.parse("-1/4").to_fraction()] * 3
    decomposition = weight_decomposition(b.rep("standard"), b.g_data)
    assert [decomposition.components[w].dim for w in decomposition.eigenvalues] == [1, 3]


@given(sparse_vectors(15), sparse_vectors(15))
def test_adjoint_is_bracket(x, y):
    b = load_example("path-ode")
    ad = b.rep("adjoint") if "adjoint" in b.rep_names else None
    g = b.g_data.algebra
    assert g.ad_matrix(x).apply(y) == g.bracket(x, y)
    if ad is not None:
        assert ad.act(x).apply(y) == g.bracket(x, y)


def test_associated_graded_drops_inhomogeneous_brackets():
    k = load_example("cprojective").k_data
    gr = k.associated_graded()
    assert validate_algebra(gr.algebra).ok
    for (i, j), vec in gr.algebra.structure.items():
        for t in vec:
            assert gr.degrees[t] == gr.degrees[i] + gr.degrees[j]


def test_structure_errors():
    with pytest.raises(StructureError):
        LieAlgebraSpec.from_triples(["a"], [(0, 0, 0, ONE)])
    with pytest.raises(StructureError):
        validate_algebra(LieAlgebraSpec(["a", "b"], {(1, 0): {0: ONE}}))


def test_isotropy_must_have_degree_zero():
    k = load_example("g2-rolling").k_data
    assert k.validate().ok
    bad = SymmetryPair(k.algebra, list(k.isotropy), [d if i not in k.isotropy else 1 for i, d in enumerate(k.degrees)])
    assert not bad.validate().ok
