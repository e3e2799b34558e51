"""Infinitesimal extensions alpha: k -> g, their curvature and normalization."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from .field import ONE, ZERO, Scalar
from .lie import (
    DualBasisPairing,
    GradedParabolicData,
    StructureError,
    SymmetryPair,
    ValidationReport,
    dual_basis,
    equivariance_residual,
    invert_matrix,
)
from .linalg import (
    AffineSolutionSet,
    ExactMatrix,
    Subspace,
    Vector,
    solve_affine_rows,
    vec_add,
    vec_axpy,
    vec_sub,
)


class NormalizationError(ValueError):
    """Raised when no normal extension satisfies the gauge constraints."""


@dataclass
class ExtensionMap:
    """Linear map alpha: k -> g stored as a (dim g) x (dim k) matrix of columns."""

    alpha: ExactMatrix
    source: SymmetryPair
    target: GradedParabolicData
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.alpha.shape != (self.target.dim, self.source.dim):
            raise StructureError(
                f"alpha has shape {self.alpha.shape}, expected {(self.target.dim, self.source.dim)}"
            )

    @property
    def images(self) -> list[Vector]:
        if "images" not in self._cache:
            self._cache["images"] = self.alpha.columns()
        return self._cache["images"]

    def image(self, j: int) -> Vector:
        return self.images[j]

    def apply(self, x: Vector) -> Vector:
        out: Vector = {}
        for j, c in x.items():
            vec_axpy(out, c, self.images[j])
        return out

    @property
    def pairing(self) -> DualBasisPairing:
        if "pairing" not in self._cache:
            self._cache["pairing"] = dual_basis(self.target)
        return self._cache["pairing"]

    @property
    def complement(self) -> list[int]:
        return self.source.complement

    def quotient_matrix(self) -> ExactMatrix:
        """A[a][j] = X_a-component of alpha(c_j) for complement indices c_j."""
        quotient = self.pairing.quotient_basis
        rows = []
        for xa in quotient:
            row = {}
            for pos, j in enumerate(self.complement):
                value = self.images[j].get(xa)
                if value:
                    row[pos] = value
            rows.append(row)
        return ExactMatrix(len(quotient), len(self.complement), rows)

    @property
    def frame(self) -> list[Vector]:
        """u_a in k with alpha(u_a) = X_a mod p, one per quotient basis element."""
        if "frame" not in self._cache:
            amat = self.quotient_matrix()
            if amat.nrows != amat.ncols:
                raise StructureError("dim c differs from dim g/p")
            try:
                inv = invert_matrix(amat)
            except StructureError as exc:
                raise StructureError("alpha does not induce an isomorphism c -> g/p") from exc
            frame = []
            comp = self.complement
            for a in range(amat.nrows):
                vec = {}
                for pos in range(amat.ncols):
                    value = inv[pos, a]
                    if value:
                        vec[comp[pos]] = value
                frame.append(vec)
            self._cache["frame"] = frame
        return self._cache["frame"]

    def to_k(self, x: Vector) -> Vector:
        """u(x mod p): the element of c corresponding to the g_- part of x."""
        out: Vector = {}
        frame = self.frame
        for a, xa in enumerate(self.pairing.quotient_basis):
            value = x.get(xa)
            if value:
                vec_axpy(out, value, frame[a])
        return out

    def validate(self) -> ValidationReport:
        try:
            self.frame
        except StructureError as exc:
            return ValidationReport(False, "isomorphism", str(exc))
        residual = extension_law_residual(self)
        if residual:
            (y, x), vec = next(iter(sorted(residual.items())))
            return ValidationReport(
                False, "extension_law", f"[alpha(e{x + 1}), alpha(e{y + 1})] != alpha([e{x + 1}, e{y + 1}])", (y, x), vec
            )
        return ValidationReport(True, "extension")


def extension_law_residual(ext: ExtensionMap) -> dict[tuple[int, int], Vector]:
    """alpha([Y, X]) - [alpha(Y), alpha(X)] for Y in h and X in k."""
    g = ext.target

    def action(y: int) -> ExactMatrix:
        return g.algebra.ad_matrix(ext.image(y))

    return equivariance_residual(ext.images, ext.source.algebra, ext.source.isotropy, action)


@dataclass
class CurvatureTensor:
    """Alternating table kappa(e_i, e_j) over the basis of k, valued in g or gl(V)."""

    values: dict[tuple[int, int], Vector]
    dim: int
    target_space: str = "g"

    def __call__(self, i: int, j: int) -> Vector:
        if i == j:
            return {}
        if i < j:
            return self.values.get((i, j), {})
        vec = self.values.get((j, i), {})
        return {k: -c for k, c in vec.items()}

    def is_zero(self) -> bool:
        return not any(self.values.values())


def curvature(ext: ExtensionMap) -> CurvatureTensor:
    """kappa(X, Y) = [alpha(X), alpha(Y)] - alpha([X, Y]) on the basis of k."""
    g = ext.target.algebra
    k = ext.source.algebra
    values = {}
    for i, j in itertools.combinations(range(k.dim), 2):
        vec = vec_sub(g.bracket(ext.image(i), ext.image(j)), ext.apply(k.bracket_basis(i, j)))
        if vec:
            values[(i, j)] = vec
    return CurvatureTensor(values, k.dim)


def _bilinear(kappa: CurvatureTensor, x: Vector, y: Vector) -> Vector:
    out: Vector = {}
    for i, a in x.items():
        for j, b in y.items():
            if i != j:
                vec_axpy(out, a * b, kappa(i, j))
    return out


def kappa_on_g(ext: ExtensionMap, kappa: CurvatureTensor, x: Vector, y: Vector) -> Vector:
    """kappa read as a 2-form on g through g/p = c; vanishes on p."""
    return _bilinear(kappa, ext.to_k(x), ext.to_k(y))


def curvature_form(ext: ExtensionMap, kappa: CurvatureTensor | None = None) -> dict[tuple[int, int], Vector]:
    """Components kappa(u_a, u_b), a < b, over the quotient basis: coefficients of Z_a ^ Z_b."""
    kappa = kappa or curvature(ext)
    frame = ext.frame
    out = {}
    for a, b in itertools.combinations(range(len(frame)), 2):
        vec = _bilinear(kappa, frame[a], frame[b])
        if vec:
            out[(a, b)] = vec
    return out


def regularity_check(ext: ExtensionMap, kappa: CurvatureTensor | None = None) -> ValidationReport:
    """kappa has homogeneity >= 1: kappa(X_a, X_b) lies in g^{i+j+1}."""
    g = ext.target
    quotient = ext.pairing.quotient_basis
    for (a, b), vec in curvature_form(ext, kappa).items():
        bound = g.grading[quotient[a]] + g.grading[quotient[b]] + 1
        low = {k: c for k, c in vec.items() if g.grading[k] < bound}
        if low:
            return ValidationReport(False, "regularity", f"kappa(X{a + 1}, X{b + 1}) has components below degree {bound}", (a, b), low)
    return ValidationReport(True, "regularity")


def normality_residual(ext: ExtensionMap, kappa: CurvatureTensor | None = None) -> dict[int, Vector]:
    """Nonzero values of 2 sum_i [Z_i, kappa(X, X_i)] - sum_i kappa([Z_i, X], X_i) for X in the g_- basis."""
    kappa = kappa or curvature(ext)
    g = ext.target.algebra
    pairing = ext.pairing
    quotient = pairing.quotient_basis
    duals = pairing.dual_basis
    # kappa on pairs of frame elements, cached by quotient index
    frame = ext.frame
    table = {}
    for a, b in itertools.combinations(range(len(frame)), 2):
        vec = _bilinear(kappa, frame[a], frame[b])
        table[(a, b)] = vec
        table[(b, a)] = {k: -c for k, c in vec.items()}

    def kappa_q(x: Vector, b: int) -> Vector:
        out: Vector = {}
        for a, xa in enumerate(quotient):
            value = x.get(xa)
            if value and a != b:
                vec_axpy(out, value, table[(a, b)])
        return out

    residual = {}
    for a, xa in enumerate(quotient):
        total: Vector = {}
        for i, z in enumerate(duals):
            first = table.get((a, i), {}) if a != i else {}
            if first:
                vec_axpy(total, Scalar(2), g.bracket(z, first))
            moved = g.bracket(z, {xa: ONE})
            if moved:
                vec_axpy(total, -ONE, kappa_q(moved, i))
        if total:
            residual[a] = total
    return residual


def h_equivariance_of_curvature(ext: ExtensionMap, kappa: CurvatureTensor | None = None) -> dict:
    """Violations of kappa([Y,X],X') + kappa(X,[Y,X']) = ad(alpha(Y)) kappa(X,X') for Y in h."""
    kappa = kappa or curvature(ext)
    k = ext.source.algebra
    g = ext.target.algebra
    bad = {}
    for y in ext.source.isotropy:
        for i, j in itertools.combinations(range(k.dim), 2):
            lhs = vec_add(_bilinear(kappa, k.bracket_basis(y, i), {j: ONE}), _bilinear(kappa, {i: ONE}, k.bracket_basis(y, j)))
            rhs = g.bracket(ext.image(y), kappa(i, j))
            diff = vec_sub(lhs, rhs)
            if diff:
                bad[(y, i, j)] = diff
    return bad


# normalization


@dataclass
class GaugeConstraint:
    """Linear functional on the correction.

    ``kind`` "entry": ``functional`` maps matrix positions (row, col) (0-based) to
    coefficients and applies to the defining-matrix image of the correction on
    each listed column of k. ``kind`` "coefficient": ``functional`` maps g basis
    indices to coefficients. ``kind`` "grade": every component of the given
    grade vanishes on the listed columns.
    """

    kind: str
    columns: list[int] | None = None
    functional: dict[tuple[int, int], Scalar] | None = None
    grade: int | None = None

    def rows(self, g: GradedParabolicData, columns: Sequence[int], unknowns: dict[tuple[int, int], int]) -> list[Vector]:
        """Constraint rows over unknowns indexed by (g basis index, k index)."""
        selected = columns if self.columns is None else [c for c in columns if c in set(self.columns)]
        out = []
        for j in selected:
            if self.kind == "grade":
                for b in g.indices_of_grade(self.grade):
                    if (b, j) in unknowns:
                        out.append({unknowns[(b, j)]: ONE})
            elif self.kind == "entry":
                row = {}
                for b in range(g.dim):
                    if (b, j) not in unknowns:
                        continue
                    m = g.matrices[b]
                    value = ZERO
                    for (r, c), coeff in self.functional.items():
                        value = value + coeff * m[r, c]
                    if value:
                        row[unknowns[(b, j)]] = value
                if row:
                    out.append(row)
            elif self.kind == "coefficient":
                row = {unknowns[(b, j)]: c for b, c in self.functional.items() if (b, j) in unknowns and c}
                if row:
                    out.append(row)
            else:
                raise ValueError(f"unknown gauge kind {self.kind!r}")
        return out


@dataclass(frozen=True)
class CorrectionFamily(AffineSolutionSet):
    """Affine family of corrections phi with alpha = base + phi.

    Coordinates of a correction: index pos*dim(g) + b for complement position
    pos and g basis index b. ``homogeneous`` collects free directions found at
    each homogeneity step; nonlinear families are represented by their tangent
    directions at the particular solution.
    """

    base: ExtensionMap | None = None
    free_by_level: tuple = ()

    def correction_vector(self, k_index: int) -> Vector:
        g_dim = self.base.target.dim
        pos = self.base.complement.index(k_index)
        return {idx - pos * g_dim: v for idx, v in self.particular.items() if pos * g_dim <= idx < (pos + 1) * g_dim}

    def extension(self) -> ExtensionMap:
        if self.particular is None:
            raise NormalizationError("no normal extension under these gauge constraints")
        return apply_correction(self.base, self.particular)


def apply_correction(base: ExtensionMap, correction: Vector) -> ExtensionMap:
    g_dim = base.target.dim
    comp = base.complement
    columns = [dict(v) for v in base.images]
    for idx, value in correction.items():
        pos, b = divmod(idx, g_dim)
        vec_axpy(columns[comp[pos]], value, {b: ONE})
    return ExtensionMap(ExactMatrix.from_columns(g_dim, columns), base.source, base.target)


def _residual_components(ext: ExtensionMap) -> dict[tuple, tuple[Scalar, int]]:
    """All residual entries keyed uniquely, with their homogeneity."""
    g = ext.target
    k = ext.source
    kappa = curvature(ext)
    out = {}
    quotient = ext.pairing.quotient_basis
    for a, vec in normality_residual(ext, kappa).items():
        for b, value in vec.items():
            out[("n", a, b)] = (value, g.grading[b] - g.grading[quotient[a]])
    for (y, x), vec in extension_law_residual(ext).items():
        for b, value in vec.items():
            out[("e", y, x, b)] = (value, g.grading[b] - k.degrees[x])
    return out


def _level_part(components: dict, level: int) -> Vector:
    return {key: value for key, (value, h) in components.items() if h == level}


def normalize(gr_alpha: ExtensionMap, gauge: Sequence[GaugeConstraint] = ()) -> CorrectionFamily:
    """Corrections phi of positive homogeneity, vanishing on h, making gr_alpha + phi normal.

    Solved degree by degree: at homogeneity l the residuals depend affinely on the
    homogeneity-l unknowns once lower components are fixed, because every
    nonlinear term has homogeneity at least 2l.
    """
    g = gr_alpha.target
    k = gr_alpha.source
    comp = k.complement
    g_dim = g.dim
    homog = {}
    for pos, j in enumerate(comp):
        for b in range(g_dim):
            h = g.grading[b] - k.degrees[j]
            if h > 0:
                homog[(b, j)] = (pos * g_dim + b, h)
    base_components = _residual_components(gr_alpha)
    bad = _level_part(base_components, 0)
    low = {key: v for key, (v, h) in base_components.items() if h < 0 and v}
    if bad or low:
        raise NormalizationError("the graded extension violates the extension law or normality in homogeneity <= 0")
    max_level = max([h for _, h in homog.values()] + [2 * g.depth])
    correction: Vector = {}
    free_directions: list[Vector] = []
    free_by_level = []
    current = gr_alpha
    for level in range(1, max_level + 1):
        unknown_keys = sorted(key for key, (_, h) in homog.items() if h == level)
        components = _residual_components(current)
        r0 = _level_part(components, level)
        if not unknown_keys:
            if any(r0.values()):
                return CorrectionFamily(None, Subspace.zero(len(comp) * g_dim), gr_alpha, tuple(free_by_level))
            continue
        local = {key: n for n, key in enumerate(unknown_keys)}
        columns = []
        for key in unknown_keys:
            idx = homog[key][0]
            trial = apply_correction(current, {idx: ONE})
            diff = vec_sub(_level_part(_residual_components(trial), level), r0)
            columns.append(diff)
        row_keys = sorted({key for col in columns for key in col} | set(r0), key=repr)
        row_index = {key: n for n, key in enumerate(row_keys)}
        rows = [dict() for _ in row_keys]
        for n, col in enumerate(columns):
            for key, value in col.items():
                rows[row_index[key]][n] = value
        rhs = {row_index[key]: -value for key, value in r0.items() if value}
        for constraint in gauge:
            for row in constraint.rows(g, comp, local):
                rows.append(row)
        solution = solve_affine_rows(rows, rhs, len(unknown_keys))
        if solution.is_empty:
            return CorrectionFamily(None, Subspace.zero(len(comp) * g_dim), gr_alpha, tuple(free_by_level))
        step = {homog[unknown_keys[n]][0]: v for n, v in solution.particular.items()}
        free_by_level.append((level, solution.homogeneous.dim))
        for vec in solution.homogeneous.basis:
            free_directions.append({homog[unknown_keys[n]][0]: v for n, v in vec.items()})
        if step:
            correction = vec_add(correction, step)
            current = apply_correction(current, step)
    remaining = {key: v for key, (v, h) in _residual_components(current).items() if v}
    if remaining:
        return CorrectionFamily(None, Subspace.zero(len(comp) * g_dim), gr_alpha, tuple(free_by_level))
    homogeneous = Subspace.from_vectors(len(comp) * g_dim, free_directions)
    return CorrectionFamily(correction, homogeneous, gr_alpha, tuple(free_by_level))
