"""Forms in Lambda^k p_+ (x) V: Kostant codifferential, Lie algebra differentials, Laplacian, cohomology."""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

from .field import ONE, ZERO, Scalar
from .lie import (
    DualBasisPairing,
    GradedParabolicData,
    RepresentationSpec,
    StructureError,
    dual_basis,
    representation_weights,
)
from .linalg import ExactMatrix, Subspace, Vector, nullspace, vec_axpy, vec_sub
from .univariate import UPoly, apply_polynomial, minimal_polynomial


def _sort_sign(indices: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sign of the permutation sorting ``indices``, 0 if an index repeats."""
    items = list(indices)
    if len(set(items)) != len(items):
        return 0, ()
    sign = 1
    for i in range(len(items)):
        for j in range(len(items) - 1 - i):
            if items[j] > items[j + 1]:
                items[j], items[j + 1] = items[j + 1], items[j]
                sign = -sign
    return sign, tuple(items)


@dataclass(frozen=True)
class FormVector:
    """Element of Lambda^degree p_+ (x) V over the basis (monomial index, V index)."""

    degree: int
    value: Vector


class FormSpaces:
    """Wedge-monomial bases and the operators d*, d_{g_-} and the Laplacian for one (g, rep).

    Monomials are strictly increasing index tuples over the dual basis Z_a of p_+
    (equivalently over the quotient basis X_a of g_-), ordered lexicographically.
    The basis element (I, j) has flat index I_index * dim V + j. Z_I is the form
    with Z_I(X_J) = delta_IJ on increasing J.
    """

    def __init__(self, g: GradedParabolicData, rep: RepresentationSpec, pairing: DualBasisPairing | None = None):
        self.g = g
        self.rep = rep
        self.pairing = pairing or dual_basis(g)
        self.rank = len(self.pairing.quotient_basis)
        self.dim_v = rep.dim
        self._lock = threading.Lock()
        self._cache: dict = {}

    # bookkeeping

    def monomials(self, degree: int) -> list[tuple[int, ...]]:
        key = ("monomials", degree)
        if key not in self._cache:
            self._cache[key] = list(itertools.combinations(range(self.rank), degree))
        return self._cache[key]

    def monomial_index(self, degree: int) -> dict[tuple[int, ...], int]:
        key = ("monomial_index", degree)
        if key not in self._cache:
            self._cache[key] = {m: n for n, m in enumerate(self.monomials(degree))}
        return self._cache[key]

    def dim(self, degree: int) -> int:
        if degree < 0 or degree > self.rank:
            return 0
        return len(self.monomials(degree)) * self.dim_v

    def index(self, degree: int, monomial: tuple[int, ...], j: int) -> int:
        return self.monomial_index(degree)[monomial] * self.dim_v + j

    def split(self, degree: int, idx: int) -> tuple[tuple[int, ...], int]:
        m, j = divmod(idx, self.dim_v)
        return self.monomials(degree)[m], j

    @cached_property
    def weights(self) -> list[Scalar]:
        return representation_weights(self.rep, self.g)

    @cached_property
    def z_grades(self) -> list[int]:
        return [-self.g.grading[x] for x in self.pairing.quotient_basis]

    def homogeneity(self, degree: int, idx: int) -> Scalar:
        monomial, j = self.split(degree, idx)
        return Scalar(sum(self.z_grades[a] for a in monomial)) + self.weights[j]

    @cached_property
    def _rho_z(self) -> list[ExactMatrix]:
        return [self.rep.act(z) for z in self.pairing.dual_basis]

    @cached_property
    def _rho_x(self) -> list[ExactMatrix]:
        return [self.rep.rho[x] for x in self.pairing.quotient_basis]

    @cached_property
    def _z_brackets(self) -> dict[tuple[int, int], Vector]:
        """[Z_a, Z_b] expanded in the Z basis: the Z_c coefficient is B([Z_a, Z_b], X_c)."""
        out = {}
        alg = self.g.algebra
        zs = self.pairing.dual_basis
        xs = self.pairing.quotient_basis
        for a, b in itertools.combinations(range(self.rank), 2):
            w = alg.bracket(zs[a], zs[b])
            if not w:
                continue
            coords = {}
            for c, xc in enumerate(xs):
                value = self.g.invariant_form(w, {xc: ONE})
                if value:
                    coords[c] = value
            out[(a, b)] = coords
        return out

    @cached_property
    def _x_brackets(self) -> dict[tuple[int, int], Vector]:
        """[X_a, X_b] in g_- expanded in the quotient basis."""
        out = {}
        xs = self.pairing.quotient_basis
        pos = {x: a for a, x in enumerate(xs)}
        alg = self.g.algebra
        for a, b in itertools.combinations(range(self.rank), 2):
            w = alg.bracket_basis(xs[a], xs[b])
            coords = {}
            for idx, value in w.items():
                if idx not in pos:
                    raise StructureError("g_- is not closed under the bracket")
                coords[pos[idx]] = value
            if coords:
                out[(a, b)] = coords
        return out

    # operators

    def codifferential_matrix(self, degree: int) -> ExactMatrix:
        """d*: degree -> degree-1.

        d*(Z_0^...^Z_k (x) v) = sum_i (-1)^i Z_0^..^Z_i-hat^..^Z_k (x) rho(Z_i) v
                               - sum_{i<j} (-1)^{i+j} [Z_i, Z_j]^Z_0^..^Z_k (x) v  (Z_i, Z_j omitted),
        so that d*(Z (x) v) = rho(Z) v in degree one.
        """
        if degree < 1:
            raise ValueError("the codifferential is defined on forms of degree >= 1")
        key = ("codiff", degree)
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        source = self.monomials(degree)
        target_index = self.monomial_index(degree - 1)
        dim_v = self.dim_v
        columns: list[Vector] = []
        rho_cols = [m.columns() for m in self._rho_z]
        for mono in source:
            # precompute contributions per monomial then tensor with V
            first = []  # (target monomial index, sign, a)
            for i, a in enumerate(mono):
                rest = mono[:i] + mono[i + 1:]
                first.append((target_index[rest], -1 if i % 2 else 1, a))
            second: dict[int, Scalar] = {}
            for i, j in itertools.combinations(range(len(mono)), 2):
                coords = self._z_brackets.get((mono[i], mono[j]))
                if not coords:
                    continue
                rest = mono[:i] + mono[i + 1:j] + mono[j + 1:]
                base_sign = -1 if (i + j) % 2 == 0 else 1
                for c, value in coords.items():
                    sign, tgt = _sort_sign((c,) + rest)
                    if sign:
                        t = target_index[tgt]
                        second[t] = second.get(t, ZERO) + value * (base_sign * sign)
            for j in range(dim_v):
                col: Vector = {}
                for t, sign, a in first:
                    for r, value in rho_cols[a][j].items():
                        idx = t * dim_v + r
                        col[idx] = col.get(idx, ZERO) + (value if sign > 0 else -value)
                for t, value in second.items():
                    idx = t * dim_v + j
                    col[idx] = col.get(idx, ZERO) + value
                columns.append({k: v for k, v in col.items() if v})
        m = ExactMatrix.from_columns(self.dim(degree - 1), columns)
        with self._lock:
            self._cache[key] = m
        return m

    def differential_matrix(self, degree: int) -> ExactMatrix:
        """d_{g_-}: degree -> degree+1 on Hom(Lambda^k g_-, V) = Lambda^k p_+ (x) V.

        (d phi)(X_0..X_k) = sum_i (-1)^i rho(X_i) phi(..X_i-hat..)
                            + sum_{i<j} (-1)^{i+j} phi([X_i, X_j], ..X_i-hat..X_j-hat..).
        """
        key = ("diff", degree)
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        dim_v = self.dim_v
        target = self.monomials(degree + 1)
        source_index = self.monomial_index(degree)
        # for each target monomial J, list (source monomial, sign, x index or None, coefficient)
        entries: dict[int, Vector] = {}
        rho_x = self._rho_x
        for t_pos, mono in enumerate(target):
            for i, a in enumerate(mono):
                rest = mono[:i] + mono[i + 1:]
                s = source_index[rest]
                sign = ONE if i % 2 == 0 else -ONE
                # contributes rho(X_a) applied to phi_rest
                for j in range(dim_v):
                    col = entries.setdefault(s * dim_v + j, {})
                    for r, value in rho_x[a].column(j).items():
                        idx = t_pos * dim_v + r
                        col[idx] = col.get(idx, ZERO) + sign * value
            for i, j in itertools.combinations(range(len(mono)), 2):
                coords = self._x_brackets.get((mono[i], mono[j]))
                if not coords:
                    continue
                rest = mono[:i] + mono[i + 1:j] + mono[j + 1:]
                base = 1 if (i + j) % 2 == 0 else -1
                for c, value in coords.items():
                    sign, src = _sort_sign((c,) + rest)
                    if not sign:
                        continue
                    s = source_index[src]
                    for v in range(dim_v):
                        col = entries.setdefault(s * dim_v + v, {})
                        idx = t_pos * dim_v + v
                        col[idx] = col.get(idx, ZERO) + value * (base * sign)
        ncols = self.dim(degree)
        columns = [{k: v for k, v in entries.get(c, {}).items() if v} for c in range(ncols)]
        m = ExactMatrix.from_columns(self.dim(degree + 1), columns)
        with self._lock:
            self._cache[key] = m
        return m

    def box_matrix(self, degree: int) -> ExactMatrix:
        key = ("box", degree)
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        n = self.dim(degree)
        total = ExactMatrix.zeros(n, n)
        if degree + 1 <= self.rank:
            total = total + self.codifferential_matrix(degree + 1) @ self.differential_matrix(degree)
        if degree >= 1:
            total = total + self.differential_matrix(degree - 1) @ self.codifferential_matrix(degree)
        with self._lock:
            self._cache[key] = total
        return total

    def codifferential_image(self, degree: int) -> Subspace:
        """Im(d*) inside the degree-``degree`` forms."""
        key = ("image", degree)
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        if degree + 1 > self.rank:
            space = Subspace.zero(self.dim(degree))
        else:
            space = Subspace.from_vectors(self.dim(degree), self.codifferential_matrix(degree + 1).columns())
        with self._lock:
            self._cache[key] = space
        return space

    def codifferential_kernel(self, degree: int) -> Subspace:
        if degree == 0:
            return Subspace.full(self.dim(0))
        return nullspace(self.codifferential_matrix(degree))

    def image_by_homogeneity(self, degree: int) -> dict[Scalar, list[Vector]]:
        """Im(d*) split into homogeneity components (d* preserves homogeneity)."""
        out: dict[Scalar, list[Vector]] = {}
        if degree + 1 > self.rank:
            return out
        for col_idx, col in enumerate(self.codifferential_matrix(degree + 1).columns()):
            if col:
                h = self.homogeneity(degree + 1, col_idx)
                out.setdefault(h, []).append(col)
        return {h: Subspace.from_vectors(self.dim(degree), vecs).basis for h, vecs in sorted(out.items(), key=lambda kv: kv[0].to_fraction())}


def codifferential(f: FormVector, spaces: FormSpaces) -> FormVector:
    return FormVector(f.degree - 1, spaces.codifferential_matrix(f.degree).apply(f.value))


def lie_differential(f: FormVector, spaces: FormSpaces) -> FormVector:
    return FormVector(f.degree + 1, spaces.differential_matrix(f.degree).apply(f.value))


def box(degree: int, spaces: FormSpaces) -> ExactMatrix:
    """Kostant Laplacian in the given degree; checks invertibility on Im(d*)."""
    m = spaces.box_matrix(degree)
    image = spaces.codifferential_image(degree)
    if image.dim and Subspace.from_vectors(m.nrows, [m.apply(v) for v in image.basis]).dim != image.dim:
        raise StructureError("the Kostant Laplacian is singular on Im(d*)")
    return m


@dataclass(frozen=True)
class QPolynomial:
    """Q(t) = q_1 + q_2 t + ... with Q(box) box = id on Im(d*).

    ``minimal_polynomial`` is the product over homogeneity levels of the minimal
    polynomials of box on each level of Im(d*); inverting box level by level
    yields exactly this polynomial.
    """

    coefficients: tuple[Scalar, ...]
    minimal_polynomial: UPoly
    level_polynomials: tuple[tuple[Scalar, UPoly], ...]

    def as_upoly(self) -> UPoly:
        return UPoly(self.coefficients)

    def splitting_coefficients(self) -> list[Scalar]:
        """Coefficients c_j of L_0 = id + sum_j c_j (d* nabla)^j, namely -q_j."""
        return [-q for q in self.coefficients]


def inverse_polynomial(poly: UPoly) -> UPoly:
    """Q with Q(t) t = 1 modulo the monic polynomial ``poly`` (requires poly(0) != 0)."""
    c0 = poly.coeffs[0]
    if not c0:
        raise StructureError("the Kostant Laplacian is singular on Im(d*)")
    # poly = t * (c1 + c2 t + ... + t^{d-1}) + c0  =>  t^{-1} = -(c1 + ... + t^{d-1}) / c0
    inv = -c0.inverse()
    return UPoly([c * inv for c in poly.coeffs[1:]])


def q_polynomial(spaces: FormSpaces, degree: int = 0) -> QPolynomial:
    box_m = spaces.box_matrix(degree)
    levels = []
    product = UPoly([ONE])
    for h, basis in spaces.image_by_homogeneity(degree).items():
        poly = minimal_polynomial(box_m.apply, basis, box_m.nrows)
        if poly.coeffs and not poly.coeffs[0]:
            raise StructureError("the Kostant Laplacian is singular on Im(d*)")
        levels.append((h, poly))
        product = product * poly
    if product.degree == 0:
        return QPolynomial((), product, ())
    return QPolynomial(inverse_polynomial(product).coeffs, product, tuple(levels))


def verify_q_polynomial(q: QPolynomial, spaces: FormSpaces, degree: int = 0) -> bool:
    box_m = spaces.box_matrix(degree)
    poly = q.as_upoly()
    for v in spaces.codifferential_image(degree).basis:
        if vec_sub(apply_polynomial(poly, box_m.apply, box_m.apply(v)), v):
            return False
    return True


@dataclass(frozen=True)
class CohomologySpace:
    degree: int
    kernel: Subspace
    image: Subspace
    representatives: Subspace
    projection: ExactMatrix

    @property
    def dim(self) -> int:
        return self.representatives.dim


def cohomology(spaces: FormSpaces, degree: int) -> CohomologySpace:
    """H^k = Ker(d*)/Im(d*) with representatives normalized against the image echelon."""
    kernel = spaces.codifferential_kernel(degree)
    image = spaces.codifferential_image(degree)
    if not kernel.contains(image):
        raise StructureError("Im(d*) is not contained in Ker(d*)")
    image_ech = image.echelon()
    reps = Subspace.from_vectors(kernel.ambient_dim, [image_ech.reduce(v) for v in kernel.basis])
    kernel_rows = {min(v): v for v in kernel.basis}
    n = kernel.ambient_dim
    columns = []
    for i in range(n):
        # project e_i onto Ker along the coordinate complement, then reduce modulo Im
        w: Vector = {}
        if i in kernel_rows:
            vec_axpy(w, ONE, kernel_rows[i])
        columns.append(image_ech.reduce(w))
    projection = ExactMatrix.from_columns(n, columns)
    return CohomologySpace(degree, kernel, image, reps, projection)
