"""Lie algebras, gradings, dual bases, symmetry pairs and representations."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .field import ONE, ZERO, Scalar
from .linalg import (
    EchelonBasis,
    ExactMatrix,
    Subspace,
    Vector,
    nullspace,
    vec_add,
    vec_axpy,
    vec_sub,
)
from .univariate import minimal_polynomial, roots_in_field


class StructureError(ValueError):
    """Raised when algebraic input data violates a structural axiom."""


# Lie algebras


@dataclass
class LieAlgebraSpec:
    """Lie algebra given by structure constants on a named basis.

    ``structure[(i, j)]`` for i < j is the sparse vector [e_i, e_j].
    """

    names: list[str]
    structure: dict[tuple[int, int], Vector]

    @property
    def dim(self) -> int:
        return len(self.names)

    @staticmethod
    def from_triples(names: Sequence[str], triples: Iterable[tuple[int, int, int, Scalar]]) -> "LieAlgebraSpec":
        """Build from (i, j, k, c) meaning [e_i, e_j] has coefficient c on e_k (0-based)."""
        structure: dict[tuple[int, int], Vector] = {}
        for i, j, k, c in triples:
            c = Scalar.coerce(c)
            if i == j:
                if c:
                    raise StructureError(f"[e{i + 1}, e{i + 1}] must vanish")
                continue
            sign = ONE
            if i > j:
                i, j, sign = j, i, -ONE
            vec = structure.setdefault((i, j), {})
            vec_axpy(vec, sign * c, {k: ONE})
        return LieAlgebraSpec(list(names), {key: v for key, v in structure.items() if v})

    def bracket_basis(self, i: int, j: int) -> Vector:
        if i == j:
            return {}
        if i < j:
            return self.structure.get((i, j), {})
        vec = self.structure.get((j, i))
        if not vec:
            return {}
        return {k: -c for k, c in vec.items()}

    def bracket(self, x: Vector, y: Vector) -> Vector:
        out: Vector = {}
        for i, a in x.items():
            for j, b in y.items():
                if i == j:
                    continue
                vec = self.bracket_basis(i, j)
                if vec:
                    vec_axpy(out, a * b, vec)
        return out

    def ad_matrix(self, x: Vector) -> ExactMatrix:
        columns = [self.bracket(x, {k: ONE}) for k in range(self.dim)]
        return ExactMatrix.from_columns(self.dim, columns)

    def killing_form(self, x: Vector, y: Vector) -> Scalar:
        return (self.ad_matrix(x) @ self.ad_matrix(y)).trace()

    def triples(self) -> list[tuple[int, int, int, Scalar]]:
        out = []
        for (i, j), vec in sorted(self.structure.items()):
            for k, c in sorted(vec.items()):
                out.append((i, j, k, c))
        return out


@dataclass
class ValidationReport:
    """Outcome of a structural check; ``ok`` False carries the first violation."""

    ok: bool
    check: str
    detail: str = ""
    indices: tuple = ()
    residual: Vector = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok


def validate_algebra(spec: LieAlgebraSpec) -> ValidationReport:
    """Check antisymmetry and the Jacobi identity on all basis triples."""
    for (i, j), vec in spec.structure.items():
        if i >= j:
            raise StructureError("structure table keys must satisfy i < j")
    n = spec.dim
    for i, j, k in itertools.combinations(range(n), 3):
        ei, ej, ek = {i: ONE}, {j: ONE}, {k: ONE}
        total = spec.bracket(ei, spec.bracket(ej, ek))
        total = vec_add(total, spec.bracket(ej, spec.bracket(ek, ei)))
        total = vec_add(total, spec.bracket(ek, spec.bracket(ei, ej)))
        if total:
            return ValidationReport(False, "jacobi", f"Jacobi identity fails on (e{i + 1}, e{j + 1}, e{k + 1})", (i, j, k), total)
    return ValidationReport(True, "jacobi")


def validate_antisymmetric_table(table: dict[tuple[int, int], Vector], dim: int) -> ValidationReport:
    """Check a full table c[i][j] (both orders present) for antisymmetry."""
    for i in range(dim):
        for j in range(dim):
            a = table.get((i, j), {})
            b = table.get((j, i), {})
            residual = vec_add(a, b)
            if residual:
                return ValidationReport(False, "antisymmetry", f"c[{i + 1}][{j + 1}] != -c[{j + 1}][{i + 1}]", (i, j), residual)
    return ValidationReport(True, "antisymmetry")


class MatrixCoordinates:
    """Expresses matrices in a fixed linearly independent matrix basis."""

    def __init__(self, basis: Sequence[ExactMatrix]):
        if not basis:
            raise StructureError("empty matrix basis")
        self.shape = basis[0].shape
        self.size = self.shape[0] * self.shape[1]
        self.dim = len(basis)
        self._ech = EchelonBasis(self.size + self.dim)
        for k, m in enumerate(basis):
            aug = m.flatten()
            aug[self.size + k] = ONE
            if not self._ech.add(aug):
                raise StructureError("matrix basis is linearly dependent")
            if min(self._ech.pivot_rows) >= self.size:
                raise StructureError("matrix basis is linearly dependent")
        for p in self._ech.pivot_rows:
            if p >= self.size:
                raise StructureError("matrix basis is linearly dependent")

    def coordinates(self, m: ExactMatrix) -> Vector:
        rem = self._ech.reduce(m.flatten())
        coords = {}
        for idx, value in rem.items():
            if idx < self.size:
                raise StructureError("matrix does not lie in the span of the basis")
            coords[idx - self.size] = -value
        return coords


def algebra_from_matrices(names: Sequence[str], matrices: Sequence[ExactMatrix]) -> tuple[LieAlgebraSpec, MatrixCoordinates]:
    coords = MatrixCoordinates(matrices)
    structure = {}
    for i, j in itertools.combinations(range(len(matrices)), 2):
        vec = coords.coordinates(matrices[i].commutator(matrices[j]))
        if vec:
            structure[(i, j)] = vec
    return LieAlgebraSpec(list(names), structure), coords


# graded parabolic data


@dataclass
class GradedParabolicData:
    """A |k|-graded Lie algebra g with parabolic p = g^0 and nilradical p_+.

    The basis is assumed homogeneous: ``grading[i]`` is the degree of e_i.
    ``matrices`` is an optional faithful defining matrix representation used for
    the invariant trace form and for reading matrix templates.
    """

    algebra: LieAlgebraSpec
    grading: list[int]
    grading_element: Vector
    matrices: list[ExactMatrix] | None = None
    pairing_form: str = "trace"
    _coords: MatrixCoordinates | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.algebra.dim

    @property
    def depth(self) -> int:
        return max(abs(g) for g in self.grading)

    def indices_of_grade(self, grade: int) -> list[int]:
        return [i for i, g in enumerate(self.grading) if g == grade]

    @property
    def negative_indices(self) -> list[int]:
        return [i for i, g in enumerate(self.grading) if g < 0]

    @property
    def positive_indices(self) -> list[int]:
        return [i for i, g in enumerate(self.grading) if g > 0]

    @property
    def parabolic(self) -> Subspace:
        return Subspace.coordinate(self.dim, [i for i, g in enumerate(self.grading) if g >= 0])

    @property
    def nilradical(self) -> Subspace:
        return Subspace.coordinate(self.dim, self.positive_indices)

    def matrix_coordinates(self) -> MatrixCoordinates:
        if self.matrices is None:
            raise StructureError("no defining matrix representation available")
        if self._coords is None:
            self._coords = MatrixCoordinates(self.matrices)
        return self._coords

    def to_matrix(self, x: Vector) -> ExactMatrix:
        if self.matrices is None:
            raise StructureError("no defining matrix representation available")
        n = self.matrices[0].nrows
        out = ExactMatrix(n, n)
        for k, c in x.items():
            out = out + self.matrices[k].scale(c)
        return out

    def from_matrix(self, m: ExactMatrix) -> Vector:
        return self.matrix_coordinates().coordinates(m)

    def invariant_form(self, x: Vector, y: Vector) -> Scalar:
        if self.pairing_form == "trace" and self.matrices is not None:
            return (self.to_matrix(x) @ self.to_matrix(y)).trace()
        return self.algebra.killing_form(x, y)

    def grade_of(self, x: Vector) -> int | None:
        grades = {self.grading[i] for i in x}
        return grades.pop() if len(grades) == 1 else None

    def component(self, x: Vector, grade: int) -> Vector:
        return {i: c for i, c in x.items() if self.grading[i] == grade}

    def validate(self) -> ValidationReport:
        report = validate_algebra(self.algebra)
        if not report:
            return report
        n = self.dim
        for i, j in itertools.combinations(range(n), 2):
            target = self.grading[i] + self.grading[j]
            vec = self.algebra.bracket_basis(i, j)
            bad = {k: c for k, c in vec.items() if self.grading[k] != target}
            if bad:
                return ValidationReport(False, "grading", f"[e{i + 1}, e{j + 1}] leaves g_{target}", (i, j), bad)
        for i in range(n):
            got = self.algebra.bracket(self.grading_element, {i: ONE})
            want = {i: Scalar(self.grading[i])} if self.grading[i] else {}
            residual = vec_sub(got, want)
            if residual:
                return ValidationReport(False, "grading_element", f"ad(E) e{i + 1} != {self.grading[i]} e{i + 1}", (i,), residual)
        if self.matrices is not None:
            for i, j in itertools.combinations(range(n), 2):
                lhs = self.to_matrix(self.algebra.bracket_basis(i, j))
                rhs = self.matrices[i].commutator(self.matrices[j])
                if lhs != rhs:
                    return ValidationReport(False, "matrices", f"matrix bracket mismatch on (e{i + 1}, e{j + 1})", (i, j))
        return ValidationReport(True, "graded_parabolic")


@dataclass
class DualBasisPairing:
    """Quotient basis X_a of g/p (the g_- basis elements) and dual elements Z_a of p_+."""

    quotient_basis: list[int]
    dual_basis: list[Vector]
    pairing_matrix: ExactMatrix
    form: str


def dual_basis(g: GradedParabolicData) -> DualBasisPairing:
    """Solve for Z_a in p_+ with B(Z_a, X_b) = delta_ab for the invariant form B."""
    neg = g.negative_indices
    pos = g.positive_indices
    if len(neg) != len(pos):
        raise StructureError("g_- and p_+ have different dimensions")
    # P[c][b] = B(p_c, X_b); Z_a = sum_c W[a][c] p_c with W = P^{-1}
    gram = ExactMatrix.from_dense(
        [[g.invariant_form({pc: ONE}, {xb: ONE}) for xb in neg] for pc in pos]
    )
    inverse = invert_matrix(gram)
    duals = []
    for a in range(len(neg)):
        vec = {}
        for c, pc in enumerate(pos):
            value = inverse[a, c]
            if value:
                vec[pc] = value
        duals.append(vec)
    pairing = ExactMatrix.from_dense(
        [[g.invariant_form(z, {xb: ONE}) for xb in neg] for z in duals]
    )
    if pairing != ExactMatrix.identity(len(neg)):
        raise StructureError("dual basis solve failed")
    form = "trace" if (g.pairing_form == "trace" and g.matrices is not None) else "killing"
    return DualBasisPairing(neg, duals, pairing, form)


def invert_matrix(m: ExactMatrix) -> ExactMatrix:
    """Inverse of a square matrix, raising StructureError when singular."""
    n = m.nrows
    ech = EchelonBasis(2 * n)
    for r, row in enumerate(m.rows):
        aug = dict(row)
        aug[n + r] = ONE
        ech.add(aug)
    if ech.pivots() != list(range(n)):
        raise StructureError("degenerate pairing between g_- and p_+")
    inv = ExactMatrix(n, n)
    for p, row in ech.pivot_rows.items():
        inv.rows[p] = {idx - n: v for idx, v in row.items() if idx >= n}
    return inv


# symmetry pairs


@dataclass
class SymmetryPair:
    """Symmetry algebra k with isotropy h (basis indices) and filtration degrees."""

    algebra: LieAlgebraSpec
    isotropy: list[int]
    degrees: list[int]

    @property
    def dim(self) -> int:
        return self.algebra.dim

    @property
    def complement(self) -> list[int]:
        return [i for i in range(self.dim) if i not in set(self.isotropy)]

    @property
    def isotropy_space(self) -> Subspace:
        return Subspace.coordinate(self.dim, self.isotropy)

    @property
    def complement_space(self) -> Subspace:
        return Subspace.coordinate(self.dim, self.complement)

    def associated_graded(self) -> "SymmetryPair":
        """gr(k): keep only the bracket components whose degree is the sum of the degrees."""
        triples = []
        for i, j in itertools.combinations(range(self.dim), 2):
            for k, c in self.algebra.bracket_basis(i, j).items():
                if self.degrees[k] == self.degrees[i] + self.degrees[j]:
                    triples.append((i, j, k, c))
        names = list(self.algebra.names)
        return SymmetryPair(LieAlgebraSpec.from_triples(names, triples), list(self.isotropy), list(self.degrees))

    def validate(self) -> ValidationReport:
        report = validate_algebra(self.algebra)
        if not report:
            return report
        hset = set(self.isotropy)
        for i, j in itertools.combinations(self.isotropy, 2):
            vec = self.algebra.bracket_basis(i, j)
            bad = {k: c for k, c in vec.items() if k not in hset}
            if bad:
                return ValidationReport(False, "isotropy", f"[e{i + 1}, e{j + 1}] leaves h", (i, j), bad)
        for i in self.isotropy:
            if self.degrees[i] != 0:
                return ValidationReport(False, "isotropy", f"isotropy element e{i + 1} must have degree 0", (i,))
        return ValidationReport(True, "symmetry_pair")


# representations


@dataclass
class RepresentationSpec:
    """Representation of g on F^dim: one matrix per basis element of g.

    ``to_algebra``/``from_algebra`` are set for adjoint-type representations: they
    project V onto g and embed g into V. ``trace_direction`` flags an invariant
    direction (the identity inside gl(n)) that is not part of g.
    """

    name: str
    dim: int
    rho: list[ExactMatrix]
    to_algebra: ExactMatrix | None = None
    from_algebra: ExactMatrix | None = None
    trace_direction: Vector | None = None
    labels: list[str] | None = None

    def act(self, x: Vector) -> ExactMatrix:
        out = ExactMatrix(self.dim, self.dim)
        for k, c in x.items():
            out = out + self.rho[k].scale(c)
        return out

    def act_on(self, x: Vector, v: Vector) -> Vector:
        out: Vector = {}
        for k, c in x.items():
            vec_axpy(out, c, self.rho[k].apply(v))
        return out

    @property
    def is_adjoint_type(self) -> bool:
        return self.to_algebra is not None and self.from_algebra is not None


def validate_representation(rep: RepresentationSpec, algebra: LieAlgebraSpec) -> ValidationReport:
    for i, j in itertools.combinations(range(algebra.dim), 2):
        lhs = rep.act(algebra.bracket_basis(i, j))
        rhs = rep.rho[i].commutator(rep.rho[j])
        if lhs != rhs:
            return ValidationReport(False, "homomorphism", f"rho([e{i + 1}, e{j + 1}]) != [rho(e{i + 1}), rho(e{j + 1})]", (i, j))
    return ValidationReport(True, "homomorphism")


def standard_representation(g: GradedParabolicData, name: str = "standard") -> RepresentationSpec:
    if g.matrices is None:
        raise StructureError("no defining matrix representation available")
    return RepresentationSpec(name, g.matrices[0].nrows, list(g.matrices))


def trivial_representation(g: GradedParabolicData, name: str = "trivial") -> RepresentationSpec:
    return RepresentationSpec(name, 1, [ExactMatrix(1, 1) for _ in range(g.dim)])


def adjoint_representation(g: GradedParabolicData, name: str = "adjoint") -> RepresentationSpec:
    rho = [g.algebra.ad_matrix({i: ONE}) for i in range(g.dim)]
    ident = ExactMatrix.identity(g.dim)
    return RepresentationSpec(name, g.dim, rho, to_algebra=ident, from_algebra=ident, labels=list(g.algebra.names))


def matrix_algebra_representation(g: GradedParabolicData, name: str = "gl") -> RepresentationSpec:
    """gl(n) = standard tensor dual with commutator action, the identity flagged as trace direction."""
    std = standard_representation(g)
    n = std.dim
    rep = build_representation(std, "tensor", build_representation(std, "dual"), name=name)
    # from_algebra: matrix M -> entries M[r][c] at index r*n + c
    columns = [g.matrices[k].flatten() for k in range(g.dim)]
    from_alg = ExactMatrix.from_columns(n * n, columns)
    # to_algebra: trace-free part expressed in the basis of g
    coords = g.matrix_coordinates()
    inv_n = Scalar(1) / n
    to_cols = []
    for idx in range(n * n):
        m = ExactMatrix(n, n)
        r, c = divmod(idx, n)
        m.rows[r][c] = ONE
        if r == c:
            for d in range(n):
                m.rows[d][d] = m.rows[d].get(d, ZERO) - inv_n
                if not m.rows[d][d]:
                    del m.rows[d][d]
        to_cols.append(coords.coordinates(m))
    to_alg = ExactMatrix.from_columns(g.dim, to_cols)
    rep.to_algebra = to_alg
    rep.from_algebra = from_alg
    rep.trace_direction = {r * n + r: ONE for r in range(n)}
    return rep


def _sym_alt_action(x: ExactMatrix, pairs: list[tuple[int, int]], sign: int) -> ExactMatrix:
    """Action on symmetric (sign=+1) or alternating (sign=-1) 2-tensors."""
    index = {p: k for k, p in enumerate(pairs)}
    cols = x.columns()
    m = ExactMatrix(len(pairs), len(pairs))
    for k, (i, j) in enumerate(pairs):
        # T = E_ij + sign*E_ji (or E_ii); M = X T ; X.T = M + sign*M^t
        mcols: dict[int, Vector] = {}
        if i == j:
            mcols[i] = dict(cols[i])
        else:
            mcols[j] = dict(cols[i])
            col = mcols.setdefault(i, {})
            vec_axpy(col, Scalar(sign), cols[j])
        entries: dict[tuple[int, int], Scalar] = {}
        for c, col in mcols.items():
            for r, value in col.items():
                entries[(r, c)] = entries.get((r, c), ZERO) + value
        result: dict[int, Scalar] = {}
        for (r, c), value in entries.items():
            if not value:
                continue
            # entry (a, b) of M + sign*M^t
            for (a, b), v in (((r, c), value), ((c, r), value * sign)):
                if sign == 1 and a > b:
                    continue
                if sign == -1 and a >= b:
                    continue
                row = index[(a, b)]
                result[row] = result.get(row, ZERO) + v
        for row, value in result.items():
            if value:
                m.rows[row][k] = value
    return m


def sym2_pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for j in range(n) for i in range(j + 1)]


def alt2_pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for j in range(n) for i in range(j)]


def build_representation(base: RepresentationSpec, ctor: str, other: RepresentationSpec | None = None,
                         name: str | None = None) -> RepresentationSpec:
    """Functorial constructions: dual, conjugate, tensor, sym2, alt2."""
    if ctor == "dual":
        rho = [-m.transpose() for m in base.rho]
        return RepresentationSpec(name or f"dual({base.name})", base.dim, rho)
    if ctor == "conjugate":
        rho = [m.conj_i() for m in base.rho]
        return RepresentationSpec(name or f"conjugate({base.name})", base.dim, rho)
    if ctor == "tensor":
        if other is None:
            raise ValueError("tensor needs a second representation")
        ident_a = ExactMatrix.identity(base.dim)
        ident_b = ExactMatrix.identity(other.dim)
        rho = [a.kron(ident_b) + ident_a.kron(b) for a, b in zip(base.rho, other.rho)]
        return RepresentationSpec(name or f"tensor({base.name},{other.name})", base.dim * other.dim, rho)
    if ctor == "sym2":
        pairs = sym2_pairs(base.dim)
        rho = [_sym_alt_action(m, pairs, 1) for m in base.rho]
        return RepresentationSpec(name or f"sym2({base.name})", len(pairs), rho)
    if ctor == "alt2":
        pairs = alt2_pairs(base.dim)
        rho = [_sym_alt_action(m, pairs, -1) for m in base.rho]
        return RepresentationSpec(name or f"alt2({base.name})", len(pairs), rho)
    raise ValueError(f"unknown representation constructor {ctor!r}")


@dataclass
class WeightDecomposition:
    eigenvalues: list[Scalar]
    components: dict
    filtration: dict


def grading_action(rep: RepresentationSpec, g: GradedParabolicData) -> ExactMatrix:
    return rep.act(g.grading_element)


def representation_weights(rep: RepresentationSpec, g: GradedParabolicData) -> list[Scalar]:
    """Diagonal of rho(E); requires rho(E) to be diagonal in the chosen basis."""
    e = grading_action(rep, g)
    weights = []
    for r, row in enumerate(e.rows):
        if any(c != r for c in row):
            raise StructureError(f"rho(E) is not diagonal in the basis of {rep.name}")
        weights.append(row.get(r, ZERO))
    return weights


def weight_decomposition(rep: RepresentationSpec, g: GradedParabolicData) -> WeightDecomposition:
    """Eigenspaces of rho(E), eigenvalues descending, with the filtration V^l."""
    e = grading_action(rep, g)
    op = e.apply
    poly = minimal_polynomial(op, [{i: ONE} for i in range(rep.dim)], rep.dim)
    roots = roots_in_field(poly)
    if roots is None or any(not r.is_rational() for r, _ in roots):
        raise StructureError("rho(E) has eigenvalues outside the rationals")
    if any(m > 1 for _, m in roots):
        raise StructureError("rho(E) is not diagonalizable")
    eigenvalues = sorted((r for r, _ in roots), key=lambda s: s.to_fraction(), reverse=True)
    components = {}
    for lam in eigenvalues:
        shifted = e - ExactMatrix.identity(rep.dim).scale(lam)
        components[lam] = nullspace(shifted)
    filtration = {}
    for lam in eigenvalues:
        space = Subspace.zero(rep.dim)
        for mu in eigenvalues:
            if mu.to_fraction() >= lam.to_fraction():
                space = space + components[mu]
        filtration[lam] = space
    return WeightDecomposition(eigenvalues, components, filtration)


def equivariance_residual(
    images: Sequence[Vector],
    k_algebra: LieAlgebraSpec,
    isotropy: Sequence[int],
    target_action: Callable[[int], ExactMatrix],
) -> dict[tuple[int, int], Vector]:
    """Nonzero values of images([Y, X]) - target_action(Y) images(X) for Y in h, X in k."""
    residual = {}
    for y in isotropy:
        act = target_action(y)
        for x in range(k_algebra.dim):
            lhs: Vector = {}
            for k, c in k_algebra.bracket_basis(y, x).items():
                vec_axpy(lhs, c, images[k])
            diff = vec_sub(lhs, act.apply(images[x]))
            if diff:
                residual[(y, x)] = diff
    return residual
