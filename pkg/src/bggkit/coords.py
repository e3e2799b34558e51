"""Coordinate expressions of solutions: exponentials of -Phi(X) on S^infinity and normal coordinates."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from scipy.linalg import expm

from .connection import ConnectionMap
from .expr import Polynomial
from .extension import ExtensionMap
from .field import ONE, ZERO, Scalar
from .lie import RepresentationSpec
from .linalg import ExactMatrix, Subspace, Vector
from .solutions import normal_solutions, s_chain
from .univariate import minimal_polynomial, roots_in_field, upoly_gcd

FACTOR_KINDS = ("nilpotent", "diagonalizable", "numeric")
STABILITY_BOUND = 10.0


class ExactExponentialError(ValueError):
    """Raised when an exact exponential is requested but not available."""


class NumericStabilityWarning(UserWarning):
    """Emitted when ||t Phi(X)|| exceeds the bound of the numeric exponential."""


class PolynomialMatrix:
    """Matrix with Polynomial entries."""

    def __init__(self, rows: Sequence[Sequence[Polynomial]]):
        self.rows = [list(r) for r in rows]

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.rows[0]) if self.rows else 0

    @staticmethod
    def identity(n: int) -> "PolynomialMatrix":
        return PolynomialMatrix([[Polynomial.constant(ONE if i == j else ZERO) for j in range(n)] for i in range(n)])

    @staticmethod
    def linear_combination(variables: Sequence[str], matrices: Sequence[ExactMatrix]) -> "PolynomialMatrix":
        """sum_i variables[i] * matrices[i]."""
        n, m = matrices[0].shape
        rows = [[Polynomial() for _ in range(m)] for _ in range(n)]
        for var, mat in zip(variables, matrices):
            x = Polynomial.variable(var)
            for r, c, value in mat.nonzero_entries():
                rows[r][c] = rows[r][c] + x * Polynomial.constant(value)
        return PolynomialMatrix(rows)

    def __matmul__(self, other: "PolynomialMatrix") -> "PolynomialMatrix":
        n, k = self.shape
        m = other.shape[1]
        out = [[Polynomial() for _ in range(m)] for _ in range(n)]
        for i in range(n):
            for j in range(k):
                a = self.rows[i][j]
                if a.is_zero():
                    continue
                for c in range(m):
                    b = other.rows[j][c]
                    if not b.is_zero():
                        out[i][c] = out[i][c] + a * b
        return PolynomialMatrix(out)

    def __add__(self, other: "PolynomialMatrix") -> "PolynomialMatrix":
        return PolynomialMatrix([[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)])

    def scale(self, factor) -> "PolynomialMatrix":
        f = Polynomial.constant(Scalar.coerce(factor))
        return PolynomialMatrix([[a * f for a in r] for r in self.rows])

    def is_zero(self) -> bool:
        return all(a.is_zero() for r in self.rows for a in r)

    def __eq__(self, other):
        return isinstance(other, PolynomialMatrix) and self.rows == other.rows

    def degree(self) -> int:
        return max((a.degree() for r in self.rows for a in r if not a.is_zero()), default=0)

    def substitute(self, values: Mapping[str, Scalar]) -> ExactMatrix:
        n, m = self.shape
        entries = []
        for i, r in enumerate(self.rows):
            for j, a in enumerate(r):
                value = a.substitute(values)
                if not value.is_constant():
                    raise ValueError(f"unassigned variables {sorted(value.variables())}")
                entries.append((i, j, value.constant_term()))
        return ExactMatrix.from_entries(n, m, entries)

    def evaluate(self, values: Mapping[str, complex | float]) -> np.ndarray:
        return np.array([[a.evaluate(values) for a in r] for r in self.rows], dtype=complex)

    def apply(self, vec: Sequence[Polynomial]) -> list[Polynomial]:
        return [sum((a * v for a, v in zip(r, vec)), Polynomial()) for r in self.rows]

    def __str__(self) -> str:
        return "\n".join("[" + ", ".join(str(a) for a in r) + "]" for r in self.rows)


@dataclass(frozen=True)
class ExponentialSplit:
    """exp(t M) = sum_lambda e^{lambda t} P_lambda for a diagonalizable M."""

    terms: tuple[tuple[Scalar, ExactMatrix], ...]
    variable: str = "t"

    def evaluate(self, t: float) -> np.ndarray:
        return sum(np.exp(lam.to_complex() * t) * p.to_numpy() for lam, p in self.terms)

    def exact(self, t) -> ExactMatrix:
        """Exact value, available only when every lambda * t vanishes."""
        t = Scalar.coerce(t)
        if any(lam * t for lam, _ in self.terms):
            raise ExactExponentialError("e^(lambda t) is not in Q(i, sqrt 2); use numeric evaluation")
        n = self.terms[0][1].nrows
        return sum((p for _, p in self.terms), ExactMatrix.zeros(n, n))

    def __str__(self) -> str:
        return " + ".join(f"e^({lam}*{self.variable}) * {p.to_dense()}" for lam, p in self.terms)


def invariant_closure(conn: ConnectionMap, space: Subspace) -> Subspace:
    """Smallest Phi(k)-invariant subspace containing ``space``."""
    current = space
    while True:
        vectors = list(current.basis)
        for m in conn.phi:
            vectors.extend(m.apply(v) for v in current.basis)
        nxt = Subspace.from_vectors(conn.dim, vectors)
        if nxt.dim == current.dim:
            return current
        current = nxt


def restrict(m: ExactMatrix, space: Subspace) -> ExactMatrix:
    """Matrix of m on an invariant subspace, in the coordinates of its echelon basis."""
    cols = [space.coordinates(m.apply(v)) for v in space.basis]
    return ExactMatrix.from_columns(space.dim, cols)


def _nilpotent_series(generator: PolynomialMatrix, n: int) -> PolynomialMatrix | None:
    """sum_k M^k / k! if M^n = 0, else None."""
    total = PolynomialMatrix.identity(n)
    power = PolynomialMatrix.identity(n)
    for k in range(1, n + 1):
        power = power @ generator
        if power.is_zero():
            return total
        total = total + power.scale(Fraction(1, math.factorial(k)))
    return None if not power.is_zero() else total


def _diagonal_split(m: ExactMatrix) -> ExponentialSplit | None:
    """Eigenprojector decomposition of m if it is diagonalizable over Q(i, sqrt 2)."""
    n = m.nrows
    poly = minimal_polynomial(m.apply, [{i: ONE} for i in range(n)], n)
    if upoly_gcd(poly, poly.derivative()).degree > 0:
        return None
    roots = roots_in_field(poly)
    if roots is None:
        raise ExactExponentialError("eigenvalues outside Q(i, sqrt 2); use numeric mode")
    eye = ExactMatrix.identity(n)
    terms = []
    for lam, _ in roots:
        proj = eye
        for mu, _ in roots:
            if mu != lam:
                proj = (proj @ (m - eye.scale(mu))).scale((lam - mu).inverse())
        terms.append((lam, proj))
    return ExponentialSplit(tuple(terms))


@dataclass(frozen=True)
class ExpFactor:
    """exp(-Phi(X)) with X = sum_i parameters[i] * directions[i]."""

    directions: tuple[Vector, ...]
    parameters: tuple[str, ...]
    kind: str = "numeric"

    def __post_init__(self):
        if self.kind not in FACTOR_KINDS:
            raise ValueError(f"unknown factor kind {self.kind!r}; expected one of {FACTOR_KINDS}")
        if len(self.directions) != len(self.parameters):
            raise ValueError("each direction needs exactly one parameter")
        if self.kind == "diagonalizable" and len(self.directions) != 1:
            raise ValueError("a diagonalizable factor has a single direction")

    @staticmethod
    def from_catalog(entry: Mapping, names: Sequence[str]) -> "ExpFactor":
        dirs = tuple({names.index(d): ONE} for d in entry["directions"])
        return ExpFactor(dirs, tuple(entry["parameters"]), entry.get("kind", "numeric"))


@dataclass(frozen=True)
class FactorExponential:
    """A factor restricted to the invariant closure, with its exact form when one exists."""

    factor: ExpFactor
    generators: tuple[ExactMatrix, ...]  # -Phi(direction_i) restricted
    exact_form: PolynomialMatrix | ExponentialSplit | None

    def generator_at(self, values: Mapping[str, float]) -> np.ndarray:
        return sum(values[p] * g.to_numpy() for p, g in zip(self.factor.parameters, self.generators))

    def numeric(self, values: Mapping[str, float]) -> np.ndarray:
        if isinstance(self.exact_form, PolynomialMatrix):
            return self.exact_form.evaluate(values)
        if isinstance(self.exact_form, ExponentialSplit):
            return self.exact_form.evaluate(values[self.factor.parameters[0]])
        gen = self.generator_at(values)
        if np.linalg.norm(gen, 2) > STABILITY_BOUND:
            warnings.warn(f"||t Phi(X)|| exceeds {STABILITY_BOUND}; accuracy not guaranteed",
                          NumericStabilityWarning, stacklevel=2)
        return expm(gen)

    def exact(self, values: Mapping[str, Scalar]) -> ExactMatrix:
        if isinstance(self.exact_form, PolynomialMatrix):
            return self.exact_form.substitute(values)
        if isinstance(self.exact_form, ExponentialSplit):
            return self.exact_form.exact(values[self.factor.parameters[0]])
        raise ExactExponentialError("numeric factor has no exact form")


def factor_exponential(conn: ConnectionMap, factor: ExpFactor, space: Subspace) -> FactorExponential:
    """Restrict the factor to ``space`` and verify its declared kind."""
    gens = tuple(restrict(conn.apply(d), space).scale(-1) for d in factor.directions)
    n = space.dim
    exact_form = None
    if n == 0:
        exact_form = PolynomialMatrix([])
    elif factor.kind == "nilpotent":
        exact_form = _nilpotent_series(PolynomialMatrix.linear_combination(factor.parameters, gens), n)
        if exact_form is None:
            raise ValueError(f"factor {factor.parameters} is declared nilpotent but Phi(X) is not nilpotent")
    elif factor.kind == "diagonalizable":
        split = _diagonal_split(gens[0])
        if split is None:
            raise ValueError(f"factor {factor.parameters} is declared diagonalizable but Phi(X) is not")
        exact_form = ExponentialSplit(split.terms, factor.parameters[0])
    return FactorExponential(factor, gens, exact_form)


def exp_action(conn: ConnectionMap, x: Vector, t, *, mode: str = "auto", space: Subspace | None = None):
    """exp(-t Phi(X)) on the invariant closure of S^infinity, in its echelon coordinates.

    Rational ``t`` gives an ExactMatrix when the restriction is nilpotent, or diagonalizable with
    lambda * t = 0. A string ``t`` is a parameter name and gives a PolynomialMatrix (nilpotent) or an
    ExponentialSplit (diagonalizable). A float ``t``, ``mode="numeric"``, or a restriction without an
    exact form gives a numpy array.
    """
    if mode not in ("auto", "exact", "numeric"):
        raise ValueError(f"unknown mode {mode!r}")
    space = space if space is not None else invariant_closure(conn, s_chain(conn)[-1])
    gen = restrict(conn.apply(x), space).scale(-1)
    symbolic = isinstance(t, str)
    if mode == "numeric" or isinstance(t, float):
        if mode == "exact" or symbolic:
            raise ExactExponentialError("a float or numeric-mode parameter cannot be evaluated exactly")
        return _numeric_exponential(gen, t)
    var = t if symbolic else "t"
    if not symbolic and not Scalar.coerce(t):
        return ExactMatrix.identity(space.dim)
    series = _nilpotent_series(PolynomialMatrix.linear_combination([var], [gen]), space.dim) if space.dim else PolynomialMatrix([])
    if series is not None:
        return series if symbolic else series.substitute({var: Scalar.coerce(t)})
    try:
        split = _diagonal_split(gen)
    except ExactExponentialError:
        if mode == "exact" or symbolic:
            raise
        split = None
    if split is None:
        if mode == "exact" or symbolic:
            raise ExactExponentialError("Phi(X) is neither nilpotent nor diagonalizable over Q(i, sqrt 2); "
                                        "use numeric mode")
        return _numeric_exponential(gen, t)
    split = ExponentialSplit(split.terms, var)
    if symbolic:
        return split
    try:
        return split.exact(t)
    except ExactExponentialError:
        if mode == "exact":
            raise
        return split.evaluate(Scalar.coerce(t).to_complex())


def _numeric_exponential(gen: ExactMatrix, t) -> np.ndarray:
    """Scaling and squaring with Pade order 13 (scipy)."""
    tc = Scalar.coerce(t).to_complex() if isinstance(t, (int, Fraction, Scalar)) else complex(t)
    arg = tc * gen.to_numpy()
    if np.linalg.norm(arg, 2) > STABILITY_BOUND:
        warnings.warn(f"||t Phi(X)|| exceeds {STABILITY_BOUND}; accuracy not guaranteed",
                      NumericStabilityWarning, stacklevel=3)
    return expm(arg)


@dataclass(frozen=True)
class SolutionExpression:
    """A local solution s(k) written through the declared factor decomposition of K."""

    space: Subspace
    basis_point_value: Vector
    factors: tuple[FactorExponential, ...]
    labels: tuple[str, ...] = field(default=())

    @property
    def parameters(self) -> list[str]:
        return [p for f in self.factors for p in f.factor.parameters]

    @property
    def is_exact(self) -> bool:
        return all(f.exact_form is not None for f in self.factors)


def solution_expression(conn: ConnectionMap, factors: Sequence[ExpFactor], basis_point_value: Vector,
                        space: Subspace | None = None) -> SolutionExpression:
    space = space if space is not None else invariant_closure(conn, s_chain(conn)[-1])
    if not space.contains_vector(basis_point_value):
        raise ValueError("the basis point value is not in S^infinity")
    exps = tuple(factor_exponential(conn, f, space) for f in factors)
    labels = tuple(conn.rep.labels or [f"w{i + 1}" for i in range(conn.dim)])
    return SolutionExpression(space, dict(basis_point_value), exps, labels)


def _param_values(expr: SolutionExpression, params) -> dict:
    names = expr.parameters
    if isinstance(params, Mapping):
        values = dict(params)
    else:
        params = list(params)
        if len(params) != len(names):
            raise ValueError(f"expected {len(names)} parameters {names}, got {len(params)}")
        values = dict(zip(names, params))
    missing = [p for p in names if p not in values]
    if missing:
        raise ValueError(f"missing parameters {missing}")
    return values


def _is_rational(value) -> bool:
    return isinstance(value, (int, Fraction, Scalar)) and not isinstance(value, bool)


def evaluate_solution(expr: SolutionExpression, params, *, exact: bool | None = None):
    """Apply the factors in declared order, the first factor acting first on s(e).

    Returns an exact Vector when every factor is exact and every parameter rational (or when
    ``exact=True``), otherwise a complex numpy vector on the representation space.
    """
    values = _param_values(expr, params)
    can_exact = expr.is_exact and all(_is_rational(v) for v in values.values())
    if exact and not can_exact:
        raise ExactExponentialError("exact evaluation needs exact factors and rational parameters")
    coords = expr.space.coordinates(expr.basis_point_value)
    if exact is None:
        exact = can_exact
    if exact:
        svals = {k: Scalar.coerce(v) for k, v in values.items()}
        for f in expr.factors:
            coords = f.exact(svals).apply(coords)
        try:
            return expr.space.combine(coords)
        except ExactExponentialError:
            raise
    fvals = {k: complex(v.to_complex()) if isinstance(v, Scalar) else complex(v) for k, v in values.items()}
    c = np.zeros(expr.space.dim, dtype=complex)
    for i, val in coords.items():
        c[i] = val.to_complex()
    for f in expr.factors:
        c = f.numeric(fvals) @ c
    basis = np.array([[v.get(j, ZERO).to_complex() for j in range(len(expr.labels))] for v in expr.space.basis],
                     dtype=complex).reshape(expr.space.dim, len(expr.labels))
    return c @ basis


def projecting_slots(ext: ExtensionMap, rep: RepresentationSpec) -> list[int]:
    """Coordinate slots not reached by rho(p_+), i.e. the H^0 part V / p_+ V in a weight basis."""
    g = ext.target
    reached = set()
    for idx in g.positive_indices:
        for r, _, _ in rep.act({idx: ONE}).nonzero_entries():
            reached.add(r)
    return [i for i in range(rep.dim) if i not in reached]


@dataclass(frozen=True)
class NormalCoordinateForm:
    """nu(n) = exp(-rho(X(n))) nu with X(n) = sum_a n_a X_a over g_-."""

    variables: tuple[str, ...]
    components: tuple[Polynomial, ...]
    projecting: tuple[int, ...]
    labels: tuple[str, ...]

    @property
    def degree(self) -> int:
        return max((p.degree() for p in self.components if not p.is_zero()), default=0)

    def projecting_components(self) -> list[Polynomial]:
        return [self.components[i] for i in self.projecting]

    def coefficient_table(self) -> list[tuple[str, str, Scalar]]:
        """(component label, monomial, coefficient) rows."""
        rows = []
        for label, poly in zip(self.labels, self.components):
            for mono, coeff in poly._sorted_terms():
                name = "*".join(v if e == 1 else f"{v}^{e}" for v, e in mono) or "1"
                rows.append((label, name, coeff))
        return rows


def normal_coordinate_polynomial(ext: ExtensionMap, rep: RepresentationSpec, nu: Vector,
                                 variables: Sequence[str] | None = None,
                                 check_normal: bool = True) -> NormalCoordinateForm:
    g = ext.target
    negative = list(g.negative_indices)
    names = tuple(variables) if variables is not None else tuple(f"n{i + 1}" for i in range(len(negative)))
    if len(names) != len(negative):
        raise ValueError(f"expected {len(negative)} normal coordinates")
    if check_normal and not normal_solutions(ext, rep).contains_vector(nu):
        raise ValueError("the vector is not a normal solution")
    gen = PolynomialMatrix.linear_combination(names, [rep.act({i: ONE}).scale(-1) for i in negative])
    vec = [Polynomial.constant(nu.get(i, ZERO)) for i in range(rep.dim)]
    total = list(vec)
    term = vec
    for k in range(1, rep.dim + 1):
        term = [p / k for p in gen.apply(term)]
        if all(p.is_zero() for p in term):
            break
        total = [a + b for a, b in zip(total, term)]
    labels = tuple(rep.labels or [f"w{i + 1}" for i in range(rep.dim)])
    return NormalCoordinateForm(names, tuple(total), tuple(projecting_slots(ext, rep)), labels)
