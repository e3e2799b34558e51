"""Exact linear algebra over Q(i, sqrt 2).

Vectors are stored sparsely as ``dict[int, Scalar]`` with no zero values.
Matrices keep one such dict per row. Echelon forms use the leftmost pivot
with a leading coefficient of one, so subspaces have a canonical basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .field import ONE, ZERO, Scalar

Vector = dict  # dict[int, Scalar]


class AmbientMismatchError(ValueError):
    """Raised when subspaces or vectors of different ambient dimension are combined."""


# sparse vector helpers


def vec_from_dense(values: Sequence) -> Vector:
    out = {}
    for idx, value in enumerate(values):
        s = Scalar.coerce(value)
        if s:
            out[idx] = s
    return out


def vec_to_dense(vec: Vector, dim: int) -> list[Scalar]:
    dense = [ZERO] * dim
    for idx, value in vec.items():
        dense[idx] = value
    return dense


def vec_add(u: Vector, v: Vector) -> Vector:
    out = dict(u)
    for idx, value in v.items():
        total = out.get(idx)
        total = value if total is None else total + value
        if total:
            out[idx] = total
        else:
            out.pop(idx, None)
    return out


def vec_sub(u: Vector, v: Vector) -> Vector:
    out = dict(u)
    for idx, value in v.items():
        total = out.get(idx)
        total = -value if total is None else total - value
        if total:
            out[idx] = total
        else:
            out.pop(idx, None)
    return out


def vec_scale(v: Vector, factor: Scalar) -> Vector:
    if not factor:
        return {}
    if factor == ONE:
        return dict(v)
    return {idx: value * factor for idx, value in v.items()}


def vec_axpy(target: Vector, factor: Scalar, v: Vector) -> None:
    """In place: target += factor * v."""
    if not factor:
        return
    for idx, value in v.items():
        prod = factor * value
        total = target.get(idx)
        total = prod if total is None else total + prod
        if total:
            target[idx] = total
        else:
            del target[idx]


def vec_dot(u: Vector, v: Vector) -> Scalar:
    if len(u) > len(v):
        u, v = v, u
    total = ZERO
    for idx, value in u.items():
        other = v.get(idx)
        if other is not None:
            total = total + value * other
    return total


def vec_conj(v: Vector) -> Vector:
    return {idx: value.conj_i() for idx, value in v.items()}


def vec_str(vec: Vector, dim: int) -> str:
    return "(" + ", ".join(str(x) for x in vec_to_dense(vec, dim)) + ")"


# matrices


class ExactMatrix:
    """Exact matrix over Q(i, sqrt 2), stored as sparse rows."""

    __slots__ = ("nrows", "ncols", "rows")

    def __init__(self, nrows: int, ncols: int, rows: Sequence[Vector] | None = None):
        self.nrows = nrows
        self.ncols = ncols
        if rows is None:
            self.rows = [dict() for _ in range(nrows)]
        else:
            if len(rows) != nrows:
                raise ValueError("row count does not match nrows")
            self.rows = [dict(r) for r in rows]

    @staticmethod
    def from_dense(values: Sequence[Sequence]) -> "ExactMatrix":
        nrows = len(values)
        ncols = len(values[0]) if nrows else 0
        rows = []
        for row in values:
            if len(row) != ncols:
                raise ValueError("ragged matrix")
            rows.append(vec_from_dense(row))
        return ExactMatrix(nrows, ncols, rows)

    @staticmethod
    def from_entries(nrows: int, ncols: int, entries: Iterable[tuple[int, int, Scalar]]) -> "ExactMatrix":
        m = ExactMatrix(nrows, ncols)
        for r, c, value in entries:
            value = Scalar.coerce(value)
            if value:
                total = m.rows[r].get(c, ZERO) + value
                if total:
                    m.rows[r][c] = total
                else:
                    m.rows[r].pop(c, None)
        return m

    @staticmethod
    def from_columns(nrows: int, columns: Sequence[Vector]) -> "ExactMatrix":
        m = ExactMatrix(nrows, len(columns))
        for c, col in enumerate(columns):
            for r, value in col.items():
                m.rows[r][c] = value
        return m

    @staticmethod
    def identity(n: int) -> "ExactMatrix":
        return ExactMatrix(n, n, [{i: ONE} for i in range(n)])

    @staticmethod
    def zeros(nrows: int, ncols: int) -> "ExactMatrix":
        return ExactMatrix(nrows, ncols)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def entries(self) -> list[Scalar]:
        """Row-major list of all entries."""
        out = []
        for row in self.rows:
            out.extend(vec_to_dense(row, self.ncols))
        return out

    def to_dense(self) -> list[list[Scalar]]:
        return [vec_to_dense(row, self.ncols) for row in self.rows]

    def to_numpy(self) -> np.ndarray:
        arr = np.zeros((self.nrows, self.ncols), dtype=complex)
        for r, row in enumerate(self.rows):
            for c, value in row.items():
                arr[r, c] = value.to_complex()
        return arr

    def __getitem__(self, key: tuple[int, int]) -> Scalar:
        r, c = key
        return self.rows[r].get(c, ZERO)

    def nonzero_entries(self):
        for r, row in enumerate(self.rows):
            for c, value in sorted(row.items()):
                yield r, c, value

    def column(self, c: int) -> Vector:
        return {r: row[c] for r, row in enumerate(self.rows) if c in row}

    def columns(self) -> list[Vector]:
        cols = [dict() for _ in range(self.ncols)]
        for r, row in enumerate(self.rows):
            for c, value in row.items():
                cols[c][r] = value
        return cols

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix(self.ncols, self.nrows, self.columns())

    def is_zero(self) -> bool:
        return not any(self.rows)

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.shape == other.shape and self.rows == other.rows

    def __hash__(self):
        return hash((self.shape, tuple(frozenset(r.items()) for r in self.rows)))

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check_same_shape(other)
        return ExactMatrix(self.nrows, self.ncols, [vec_add(a, b) for a, b in zip(self.rows, other.rows)])

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check_same_shape(other)
        return ExactMatrix(self.nrows, self.ncols, [vec_sub(a, b) for a, b in zip(self.rows, other.rows)])

    def __neg__(self) -> "ExactMatrix":
        return self.scale(-ONE)

    def scale(self, factor) -> "ExactMatrix":
        factor = Scalar.coerce(factor)
        return ExactMatrix(self.nrows, self.ncols, [vec_scale(r, factor) for r in self.rows])

    def _check_same_shape(self, other: "ExactMatrix") -> None:
        if self.shape != other.shape:
            raise AmbientMismatchError(f"shape mismatch {self.shape} vs {other.shape}")

    def __matmul__(self, other):
        if isinstance(other, ExactMatrix):
            if self.ncols != other.nrows:
                raise AmbientMismatchError(f"cannot multiply {self.shape} by {other.shape}")
            out = []
            orows = other.rows
            for row in self.rows:
                acc: Vector = {}
                for k, value in row.items():
                    vec_axpy(acc, value, orows[k])
                out.append(acc)
            return ExactMatrix(self.nrows, other.ncols, out)
        return NotImplemented

    def apply(self, vec: Vector) -> Vector:
        """Matrix times sparse column vector."""
        out = {}
        for r, row in enumerate(self.rows):
            if row:
                value = vec_dot(row, vec)
                if value:
                    out[r] = value
        return out

    def commutator(self, other: "ExactMatrix") -> "ExactMatrix":
        return (self @ other) - (other @ self)

    def conj_i(self) -> "ExactMatrix":
        return ExactMatrix(self.nrows, self.ncols, [vec_conj(r) for r in self.rows])

    def flatten(self) -> Vector:
        """Row-major sparse vector of the entries."""
        out = {}
        n = self.ncols
        for r, row in enumerate(self.rows):
            for c, value in row.items():
                out[r * n + c] = value
        return out

    @staticmethod
    def unflatten(vec: Vector, nrows: int, ncols: int) -> "ExactMatrix":
        m = ExactMatrix(nrows, ncols)
        for idx, value in vec.items():
            m.rows[idx // ncols][idx % ncols] = value
        return m

    def trace(self) -> Scalar:
        total = ZERO
        for r, row in enumerate(self.rows):
            value = row.get(r)
            if value is not None:
                total = total + value
        return total

    def kron(self, other: "ExactMatrix") -> "ExactMatrix":
        m = ExactMatrix(self.nrows * other.nrows, self.ncols * other.ncols)
        for r1, row1 in enumerate(self.rows):
            for c1, v1 in row1.items():
                for r2, row2 in enumerate(other.rows):
                    target = m.rows[r1 * other.nrows + r2]
                    for c2, v2 in row2.items():
                        target[c1 * other.ncols + c2] = v1 * v2
        return m

    def __str__(self) -> str:
        dense = [[str(x) for x in row] for row in self.to_dense()]
        if not dense:
            return "[]"
        width = max((len(x) for row in dense for x in row), default=1)
        return "\n".join("[" + "  ".join(x.rjust(width) for x in row) + "]" for row in dense)

    def __repr__(self) -> str:
        return f"ExactMatrix({self.nrows}x{self.ncols})"


# echelon machinery


class EchelonBasis:
    """Incrementally maintained reduced row echelon basis of a growing subspace."""

    __slots__ = ("dim", "pivot_rows")

    def __init__(self, dim: int, vectors: Iterable[Vector] = ()):
        self.dim = dim
        self.pivot_rows: dict[int, Vector] = {}
        for v in vectors:
            self.add(v)

    def __len__(self) -> int:
        return len(self.pivot_rows)

    def reduce(self, vec: Vector) -> Vector:
        """Remainder of ``vec`` after eliminating all pivot columns."""
        rows = self.pivot_rows
        hits = [(p, vec[p]) for p in vec if p in rows]
        if not hits:
            return dict(vec)
        out = dict(vec)
        for p, coeff in hits:
            vec_axpy(out, -coeff, rows[p])
        return out

    def contains(self, vec: Vector) -> bool:
        return not self.reduce(vec)

    def add(self, vec: Vector) -> bool:
        """Add a vector; returns True if the span grew."""
        rem = self.reduce(vec)
        if not rem:
            return False
        pivot = min(rem)
        lead = rem[pivot]
        if lead != ONE:
            rem = vec_scale(rem, lead.inverse())
        for row in self.pivot_rows.values():
            coeff = row.get(pivot)
            if coeff is not None:
                vec_axpy(row, -coeff, rem)
        self.pivot_rows[pivot] = rem
        return True

    def rows(self) -> list[Vector]:
        return [self.pivot_rows[p] for p in sorted(self.pivot_rows)]

    def pivots(self) -> list[int]:
        return sorted(self.pivot_rows)


def rref(rows: Iterable[Vector], ncols: int) -> tuple[list[int], list[Vector]]:
    """Reduced row echelon form: (pivot columns, nonzero rows)."""
    ech = EchelonBasis(ncols)
    for row in sorted((r for r in rows if r), key=len):
        ech.add(row)
    pivots = ech.pivots()
    return pivots, [ech.pivot_rows[p] for p in pivots]


def nullspace_rows(rows: Iterable[Vector], ncols: int) -> "Subspace":
    pivots, reduced = rref(rows, ncols)
    pivot_set = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        vec = {free: ONE}
        for p, row in zip(pivots, reduced):
            coeff = row.get(free)
            if coeff is not None:
                vec[p] = -coeff
        basis.append(vec)
    return Subspace.from_vectors(ncols, basis)


def nullspace(m: ExactMatrix) -> "Subspace":
    """Exact kernel of a matrix."""
    return nullspace_rows(m.rows, m.ncols)


def rank(m: ExactMatrix) -> int:
    return len(rref(m.rows, m.ncols)[0])


@dataclass(frozen=True)
class Subspace:
    """Subspace of F^n with a canonical reduced echelon basis."""

    ambient_dim: int
    basis: tuple  # tuple of sparse vectors in reduced echelon form

    @staticmethod
    def from_vectors(ambient_dim: int, vectors: Iterable[Vector]) -> "Subspace":
        vectors = list(vectors)
        for v in vectors:
            if v and max(v) >= ambient_dim:
                raise AmbientMismatchError("vector index outside ambient dimension")
        _, reduced = rref(vectors, ambient_dim)
        return Subspace(ambient_dim, tuple(reduced))

    @staticmethod
    def from_echelon(ech: EchelonBasis) -> "Subspace":
        return Subspace(ech.dim, tuple(ech.rows()))

    @staticmethod
    def zero(ambient_dim: int) -> "Subspace":
        return Subspace(ambient_dim, ())

    @staticmethod
    def full(ambient_dim: int) -> "Subspace":
        return Subspace(ambient_dim, tuple({i: ONE} for i in range(ambient_dim)))

    @staticmethod
    def coordinate(ambient_dim: int, indices: Iterable[int]) -> "Subspace":
        return Subspace(ambient_dim, tuple({i: ONE} for i in sorted(set(indices))))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def __len__(self) -> int:
        return self.dim

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and list(self.basis) == list(other.basis)

    def __hash__(self):
        return hash((self.ambient_dim, tuple(frozenset(v.items()) for v in self.basis)))

    def pivots(self) -> list[int]:
        return [min(v) for v in self.basis]

    def echelon(self) -> EchelonBasis:
        ech = EchelonBasis(self.ambient_dim)
        for v in self.basis:
            ech.pivot_rows[min(v)] = dict(v)
        return ech

    def _check(self, other: "Subspace") -> None:
        if self.ambient_dim != other.ambient_dim:
            raise AmbientMismatchError(
                f"ambient dimensions differ: {self.ambient_dim} vs {other.ambient_dim}"
            )

    def contains_vector(self, vec: Vector) -> bool:
        return self.echelon().contains(vec)

    def contains(self, other: "Subspace | Vector") -> bool:
        if isinstance(other, Subspace):
            self._check(other)
            ech = self.echelon()
            return all(ech.contains(v) for v in other.basis)
        return self.contains_vector(other)

    def sum(self, other: "Subspace") -> "Subspace":
        self._check(other)
        ech = self.echelon()
        for v in other.basis:
            ech.add(v)
        return Subspace.from_echelon(ech)

    def __add__(self, other: "Subspace") -> "Subspace":
        return self.sum(other)

    def constraints(self) -> list[Vector]:
        """Linear functionals (as sparse rows) whose common kernel is this subspace."""
        pivots = self.pivots()
        pivot_set = set(pivots)
        rows = []
        for free in range(self.ambient_dim):
            if free in pivot_set:
                continue
            row = {free: ONE}
            for p, v in zip(pivots, self.basis):
                coeff = v.get(free)
                if coeff is not None:
                    row[p] = -coeff
            rows.append(row)
        return rows

    def coordinates(self, vec: Vector) -> Vector:
        """Coefficients of ``vec`` in this basis; raises if not contained."""
        coords = {}
        for i, v in enumerate(self.basis):
            p = min(v)
            coeff = vec.get(p)
            if coeff is not None:
                coords[i] = coeff
        recon = self.combine(coords)
        if recon != {k: val for k, val in vec.items() if val}:
            raise ValueError("vector is not contained in the subspace")
        return coords

    def combine(self, coords: Vector) -> Vector:
        out: Vector = {}
        for i, coeff in coords.items():
            vec_axpy(out, coeff, self.basis[i])
        return out

    def intersect(self, other: "Subspace") -> "Subspace":
        self._check(other)
        if not self.basis or not other.basis:
            return Subspace.zero(self.ambient_dim)
        cons = other.constraints()
        if not cons:
            return self
        # rows: functional applied to each basis vector of self
        columns = self.basis
        rows = []
        for f in cons:
            row = {}
            for j, v in enumerate(columns):
                value = vec_dot(f, v)
                if value:
                    row[j] = value
            rows.append(row)
        kernel = nullspace_rows(rows, len(columns))
        return Subspace.from_vectors(self.ambient_dim, [self.combine(k) for k in kernel.basis])

    def quotient_basis(self, sub: "Subspace") -> "Subspace":
        """Canonical complement of ``sub`` inside ``self`` (requires sub contained in self)."""
        self._check(sub)
        if not self.contains(sub):
            raise ValueError("quotient requires the second subspace to be contained in the first")
        ech = sub.echelon()
        residues = [ech.reduce(v) for v in self.basis]
        return Subspace.from_vectors(self.ambient_dim, [r for r in residues if r])

    def image(self, m: ExactMatrix) -> "Subspace":
        if m.ncols != self.ambient_dim:
            raise AmbientMismatchError("matrix does not act on this ambient space")
        return Subspace.from_vectors(m.nrows, [m.apply(v) for v in self.basis])

    def dense_basis(self) -> list[list[Scalar]]:
        return [vec_to_dense(v, self.ambient_dim) for v in self.basis]

    def support(self) -> set[int]:
        return {i for v in self.basis for i in v}

    def __str__(self) -> str:
        if not self.basis:
            return f"0 in F^{self.ambient_dim}"
        return "span{" + ", ".join(vec_str(v, self.ambient_dim) for v in self.basis) + "}"


@dataclass(frozen=True)
class AffineSolutionSet:
    """Solutions particular + homogeneous, or empty when particular is None."""

    particular: Vector | None
    homogeneous: Subspace

    @property
    def is_empty(self) -> bool:
        return self.particular is None

    @property
    def dim(self) -> int:
        return -1 if self.particular is None else self.homogeneous.dim

    def contains(self, vec: Vector) -> bool:
        if self.particular is None:
            return False
        return self.homogeneous.contains_vector(vec_sub(vec, self.particular))


def solve_affine(a: ExactMatrix, b: Sequence | Vector) -> AffineSolutionSet:
    """All x with a x = b, exactly."""
    if not isinstance(b, dict):
        if len(b) != a.nrows:
            raise AmbientMismatchError("right-hand side length differs from row count")
        b = vec_from_dense(b)
    return solve_affine_rows(a.rows, b, a.ncols)


def solve_affine_rows(rows: Sequence[Vector], rhs: Vector, ncols: int) -> AffineSolutionSet:
    aug = []
    for i, row in enumerate(rows):
        r = dict(row)
        value = rhs.get(i)
        if value:
            r[ncols] = value
        aug.append(r)
    pivots, reduced = rref(aug, ncols + 1)
    homogeneous = nullspace_rows(rows, ncols)
    if pivots and pivots[-1] == ncols:
        return AffineSolutionSet(None, homogeneous)
    particular = {}
    for p, row in zip(pivots, reduced):
        value = row.get(ncols)
        if value:
            particular[p] = value
    return AffineSolutionSet(particular, homogeneous)
