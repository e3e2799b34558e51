"""Shared, cached computations for the test suite."""

from __future__ import annotations

import functools
from fractions import Fraction

from hypothesis import strategies as st

from bggkit.catalog import EXAMPLE_NAMES, load_example
from bggkit.field import Scalar
from bggkit.kostant import FormSpaces
from bggkit.pipeline import compute

ALL_CASES = [(g, r) for g in EXAMPLE_NAMES for r in load_example(g).rep_names]
# the 105-dimensional metrizability representation dominates prolongation time
HEAVY_CASES = {("g2-rolling", "sym2-adjoint")}
# holonomy algebras of dimension in the hundreds; their closure is too slow for the suite
LARGE_HOLONOMY_CASES = HEAVY_CASES | {("g2-rolling", "sym2"), ("cr-tube", "alt2-squared"),
                                      ("lagrangian-contact", "alt2-squared")}


def case_id(case) -> str:
    return "-".join(case)


@functools.lru_cache(maxsize=None)
def result(geometry: str, rep: str, kind: str = "prolongation"):
    return compute(load_example(geometry), rep, kind)


@functools.lru_cache(maxsize=None)
def form_spaces(geometry: str, rep: str) -> FormSpaces:
    b = load_example(geometry)
    return FormSpaces(b.g_data, b.rep(rep))


rationals = st.fractions(min_value=-5, max_value=5, max_denominator=7)
scalars = st.builds(lambda a, b, c, d: Scalar(a, b, c, d), rationals, rationals, rationals, rationals)


def sparse_vectors(dim: int, max_terms: int = 4, values=rationals):
    """Random sparse exact vectors of the given dimension."""
    if dim == 0:
        return st.just({})
    return st.dictionaries(st.integers(0, dim - 1), values.map(Scalar), max_size=max_terms).map(
        lambda d: {k: v for k, v in d.items() if v})


def frac(text: str) -> Fraction:
    return Fraction(text)
