"""Invariant connections Phi: k -> gl(V), their curvature, and the prolongation connection."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from .expr import Polynomial
from .extension import CurvatureTensor, ExtensionMap, curvature, kappa_on_g
from .field import ONE, Scalar
from .kostant import FormSpaces, inverse_polynomial
from .lie import RepresentationSpec, StructureError, ValidationReport, representation_weights
from .linalg import ExactMatrix, Vector, vec_axpy
from .univariate import UPoly, apply_polynomial, minimal_polynomial, roots_in_field


class ProlongationError(RuntimeError):
    """Raised when the prolongation iteration fails to terminate."""


@dataclass
class ConnectionMap:
    """Phi(e_j) = rho(alpha(e_j)) + psi(e_j) on the basis of k."""

    ext: ExtensionMap
    rep: RepresentationSpec
    kind: str
    psi: list[ExactMatrix]
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.rep.dim

    @property
    def base(self) -> list[ExactMatrix]:
        if "base" not in self._cache:
            self._cache["base"] = [self.rep.act(self.ext.image(j)) for j in range(self.ext.source.dim)]
        return self._cache["base"]

    @property
    def phi(self) -> list[ExactMatrix]:
        if "phi" not in self._cache:
            self._cache["phi"] = [b + p for b, p in zip(self.base, self.psi)]
        return self._cache["phi"]

    def apply(self, x: Vector) -> ExactMatrix:
        out = ExactMatrix(self.dim, self.dim)
        for j, c in x.items():
            out = out + self.phi[j].scale(c)
        return out

    def validate(self) -> ValidationReport:
        k = self.ext.source
        for y in k.isotropy:
            if not self.psi[y].is_zero():
                return ValidationReport(False, "isotropy", f"psi(e{y + 1}) must vanish on h", (y,))
        for y in k.isotropy:
            for x in range(k.dim):
                lhs = self.apply(k.algebra.bracket_basis(y, x))
                rhs = self.base[y].commutator(self.phi[x])
                if lhs != rhs:
                    return ValidationReport(False, "equivariance", f"Phi([e{y + 1}, e{x + 1}]) != [Phi(e{y + 1}), Phi(e{x + 1})]", (y, x))
        return ValidationReport(True, "connection")

    def psi_homogeneity(self) -> Scalar | None:
        """Minimal homogeneity of the difference psi, or None when psi = 0."""
        weights = representation_weights(self.rep, self.ext.target)
        k = self.ext.source
        lowest = None
        for j, m in enumerate(self.psi):
            for r, c, _ in m.nonzero_entries():
                h = weights[r] - weights[c] - k.degrees[j]
                if lowest is None or h.to_fraction() < lowest.to_fraction():
                    lowest = h
        return lowest

    def psi_table(self, coordinates: Sequence[str]) -> list[Polynomial]:
        """Row polynomials of psi(x)(w) = sum_j x_j psi(e_j) w in the rep labels."""
        labels = self.rep.labels or [f"w{k + 1}" for k in range(self.dim)]
        rows = [Polynomial() for _ in range(self.dim)]
        for j, m in enumerate(self.psi):
            xj = Polynomial.variable(coordinates[j])
            for r, c, value in m.nonzero_entries():
                rows[r] = rows[r] + xj * Polynomial.variable(labels[c]) * value
        return rows


def tractor_connection(ext: ExtensionMap, rep: RepresentationSpec) -> ConnectionMap:
    return ConnectionMap(ext, rep, "tractor", [ExactMatrix(rep.dim, rep.dim) for _ in range(ext.source.dim)])


def insertion_operator(ext: ExtensionMap, rep: RepresentationSpec, x: Vector, kappa: CurvatureTensor | None = None) -> ExactMatrix:
    """iota_kappa(x): t -> kappa(x, t) on an adjoint-type rep (g-part of t via to_algebra)."""
    if not rep.is_adjoint_type:
        raise StructureError(f"representation {rep.name} is not of adjoint type")
    kappa = kappa or curvature(ext)
    columns = []
    for t in range(rep.dim):
        y = rep.to_algebra.column(t)
        value = kappa_on_g(ext, kappa, x, y) if y else {}
        columns.append(rep.from_algebra.apply(value) if value else {})
    return ExactMatrix.from_columns(rep.dim, columns)


def automorphism_connection(ext: ExtensionMap, rep: RepresentationSpec) -> ConnectionMap:
    """ad o alpha - iota_kappa o alpha: parallel sections are infinitesimal automorphisms."""
    kappa = curvature(ext)
    psi = [-insertion_operator(ext, rep, ext.image(j), kappa) for j in range(ext.source.dim)]
    return ConnectionMap(ext, rep, "automorphism", psi)


@dataclass
class ConnectionCurvature:
    values: dict[tuple[int, int], ExactMatrix]
    dim_k: int
    dim_v: int

    def __call__(self, i: int, j: int) -> ExactMatrix:
        if i == j:
            return ExactMatrix(self.dim_v, self.dim_v)
        if i < j:
            return self.values.get((i, j), ExactMatrix(self.dim_v, self.dim_v))
        return -self.values.get((j, i), ExactMatrix(self.dim_v, self.dim_v))

    def nonzero(self) -> list[ExactMatrix]:
        return [m for _, m in sorted(self.values.items()) if not m.is_zero()]


def connection_curvature(conn: ConnectionMap) -> ConnectionCurvature:
    """R(X, Y) = [Phi(X), Phi(Y)] - Phi([X, Y]_k)."""
    k = conn.ext.source.algebra
    values = {}
    for i, j in itertools.combinations(range(k.dim), 2):
        m = conn.phi[i].commutator(conn.phi[j]) - conn.apply(k.bracket_basis(i, j))
        if not m.is_zero():
            values[(i, j)] = m
    return ConnectionCurvature(values, k.dim, conn.dim)


def bianchi_residual(conn: ConnectionMap, curv: ConnectionCurvature | None = None) -> dict[tuple[int, int, int], ExactMatrix]:
    """Nonzero cyclic sums of [Phi(X), R(Y, Z)] - R([X, Y], Z) over basis triples."""
    curv = curv or connection_curvature(conn)
    k = conn.ext.source.algebra
    n = conn.dim
    bad = {}

    def r_of(vec: Vector, z: int) -> ExactMatrix:
        out = ExactMatrix(n, n)
        for idx, c in vec.items():
            out = out + curv(idx, z).scale(c)
        return out

    for x, y, z in itertools.combinations(range(k.dim), 3):
        total = ExactMatrix(n, n)
        for a, b, c in ((x, y, z), (y, z, x), (z, x, y)):
            total = total + conn.phi[a].commutator(curv(b, c)) - r_of(k.bracket_basis(a, b), c)
        if not total.is_zero():
            bad[(x, y, z)] = total
    return bad


def curvature_matches_kappa(conn: ConnectionMap) -> bool:
    """For psi = 0: R(X, Y) = rho(kappa(X, Y))."""
    curv = connection_curvature(conn)
    kappa = curvature(conn.ext)
    for i, j in itertools.combinations(range(conn.ext.source.dim), 2):
        if curv(i, j) != conn.rep.act(kappa(i, j)):
            return False
    return True


# prolongation


class _ProlongationWorkspace:
    """Forms for gl(V)-valued 1- and 2-forms handled column by column through FormSpaces."""

    def __init__(self, ext: ExtensionMap, rep: RepresentationSpec):
        self.ext = ext
        self.rep = rep
        self.spaces = FormSpaces(ext.target, rep, ext.pairing)
        self.weights = self.spaces.weights
        self.frame = ext.frame
        self.amat = ext.quotient_matrix()
        self.rank = self.spaces.rank
        self._levels: dict | None = None

    def level_data(self) -> dict[Scalar, tuple[UPoly, list[Vector]]]:
        """Per homogeneity level of Im(d*) in degree one: minimal polynomial of box and basis."""
        if self._levels is None:
            box_m = self.spaces.box_matrix(1)
            levels = {}
            for h, basis in self.spaces.image_by_homogeneity(1).items():
                poly = minimal_polynomial(box_m.apply, basis, box_m.nrows)
                if poly.coeffs and not poly.coeffs[0]:
                    raise StructureError("the Kostant Laplacian is singular on Im(d*)")
                levels[h] = (poly, basis)
            self._levels = levels
        return self._levels

    def phi_from_psi(self, psi_forms: list[ExactMatrix]) -> list[ExactMatrix]:
        """psi on the basis of k from its components Psi_a = Psi(X_a)."""
        comp = self.ext.complement
        n = self.rep.dim
        out = [ExactMatrix(n, n) for _ in range(self.ext.source.dim)]
        for pos, j in enumerate(comp):
            m = ExactMatrix(n, n)
            for a in range(self.rank):
                coeff = self.amat[a, pos]
                if coeff:
                    m = m + psi_forms[a].scale(coeff)
            out[j] = m
        return out

    def psi_forms_from(self, psi: list[ExactMatrix]) -> list[ExactMatrix]:
        n = self.rep.dim
        forms = []
        for a in range(self.rank):
            m = ExactMatrix(n, n)
            for j, c in self.frame[a].items():
                m = m + psi[j].scale(c)
            forms.append(m)
        return forms

    def curvature_forms(self, conn: ConnectionMap) -> dict[tuple[int, int], ExactMatrix]:
        """R(u_a, u_b) for a < b over the quotient basis."""
        curv = connection_curvature(conn)
        n = self.rep.dim
        out = {}
        for a, b in itertools.combinations(range(self.rank), 2):
            m = ExactMatrix(n, n)
            for i, ci in self.frame[a].items():
                for j, cj in self.frame[b].items():
                    if i != j:
                        m = m + curv(i, j).scale(ci * cj)
            out[(a, b)] = m
        return out

    def codifferential_of_curvature(self, conn: ConnectionMap) -> list[Vector]:
        """(d* (x) id) R as one degree-1 form in p_+ (x) V per input basis vector of V."""
        forms = self.curvature_forms(conn)
        n = self.rep.dim
        index2 = self.spaces.monomial_index(2)
        codiff = self.spaces.codifferential_matrix(2) if self.rank >= 2 else None
        columns_by_pair = {key: m.columns() for key, m in forms.items() if not m.is_zero()}
        out = []
        for s in range(n):
            two_form: Vector = {}
            for (a, b), cols in columns_by_pair.items():
                base = index2[(a, b)] * n
                for r, value in cols[s].items():
                    two_form[base + r] = value
            out.append(codiff.apply(two_form) if (two_form and codiff is not None) else {})
        return out

    def column_homogeneity(self, idx: int, s: int) -> Scalar:
        return self.spaces.homogeneity(1, idx) - self.weights[s]

    def forms_to_psi(self, columns: list[Vector]) -> list[ExactMatrix]:
        """Inverse of the column encoding: column s of Psi_a from the p_+ (x) V forms."""
        n = self.rep.dim
        entries = [[] for _ in range(self.rank)]
        for s, vec in enumerate(columns):
            for idx, value in vec.items():
                a, r = divmod(idx, n)
                entries[a].append((r, s, value))
        return [ExactMatrix.from_entries(n, n, e) for e in entries]


def _lagrange_projector(roots: list[Scalar], target: Scalar, box_m: ExactMatrix, vec: Vector) -> Vector:
    out = dict(vec)
    for mu in roots:
        if mu == target:
            continue
        shifted = box_m.apply(out)
        vec_axpy(shifted, -mu, out)
        out = {k: v / (target - mu) for k, v in shifted.items()}
    return out


@dataclass
class ProlongationReport:
    iterations: int
    schedule: list[tuple[str, str]]


def prolong(conn: ConnectionMap, schedule: str = "inverse", eigen_order: str = "ascending",
            max_iterations: int | None = None) -> tuple[ConnectionMap, ProlongationReport]:
    """Modify conn by Psi of positive homogeneity, vanishing on h, until (d* (x) id) R = 0.

    ``schedule`` "inverse" removes the lowest homogeneity component of the
    obstruction in one step with box^{-1} on that level; "eigen" removes one
    box-eigenspace of it per step, in ``eigen_order`` ("ascending" or
    "descending" eigenvalues).
    """
    ext = conn.ext
    rep = conn.rep
    work = _ProlongationWorkspace(ext, rep)
    levels = work.level_data()
    box_m = work.spaces.box_matrix(1)
    psi_forms = work.psi_forms_from(conn.psi)
    if max_iterations is None:
        form_levels = {work.spaces.homogeneity(1, i) for i in range(work.spaces.dim(1))}
        distinct = {h - w for h in form_levels for w in set(work.weights)}
        eig = sum(poly.degree for poly, _ in levels.values()) or 1
        max_iterations = (len(distinct) + 1) * eig + 1
    log = []
    current = conn
    for iteration in range(max_iterations + 1):
        obstruction = work.codifferential_of_curvature(current)
        lowest = None
        for s, vec in enumerate(obstruction):
            for idx in vec:
                h = work.column_homogeneity(idx, s)
                if lowest is None or h.to_fraction() < lowest.to_fraction():
                    lowest = h
        if lowest is None:
            return current, ProlongationReport(iteration, log)
        if iteration == max_iterations:
            break
        if lowest.to_fraction() <= 0:
            raise ProlongationError("obstruction of non-positive homogeneity: the connection is not compressable")
        corrections = []
        chosen = None
        for s, vec in enumerate(obstruction):
            part = {idx: v for idx, v in vec.items() if work.column_homogeneity(idx, s) == lowest}
            if not part:
                corrections.append({})
                continue
            level = lowest + work.weights[s]
            if level not in levels:
                raise StructureError("obstruction outside Im(d*)")
            poly = levels[level][0]
            if schedule == "inverse":
                q = inverse_polynomial(poly)
                corrections.append(apply_polynomial(q, box_m.apply, part))
            elif schedule == "eigen":
                roots = roots_in_field(poly)
                if roots is None or any(m > 1 for _, m in roots):
                    raise StructureError("box is not diagonalizable over the ground field on this level")
                values = [r for r, _ in roots]
                ordered = sorted(values, key=lambda z: (z.to_complex().real, z.to_complex().imag),
                                 reverse=eigen_order == "descending")
                # first eigenvalue (in the requested order) with a nonzero component
                pieces = {lam: _lagrange_projector(values, lam, box_m, part) for lam in ordered}
                pick = None
                if chosen is not None and pieces.get(chosen):
                    pick = chosen
                else:
                    for lam in ordered:
                        if pieces[lam]:
                            pick = lam
                            break
                chosen = chosen or pick
                piece = pieces[pick]
                corrections.append({k: v / pick for k, v in piece.items()})
            else:
                raise ValueError(f"unknown schedule {schedule!r}")
        log.append((str(lowest), "all" if schedule == "inverse" else str(chosen)))
        delta = work.forms_to_psi(corrections)
        psi_forms = [p - d for p, d in zip(psi_forms, delta)]
        current = ConnectionMap(ext, rep, "prolongation", work.phi_from_psi(psi_forms))
    raise ProlongationError(f"prolongation did not terminate within {max_iterations} iterations")


def prolongation_obstruction(conn: ConnectionMap) -> list[Vector]:
    """(d* (x) id) R^Phi evaluated on each basis vector of V."""
    return _ProlongationWorkspace(conn.ext, conn.rep).codifferential_of_curvature(conn)


def norm2_condition(ext: ExtensionMap, rep: RepresentationSpec) -> bool:
    """sum_i rho(kappa(X, X_i)) rho(Z_i) = 0 for all X in g_-: sufficient for Psi = 0 when psi = 0."""
    kappa = curvature(ext)
    pairing = ext.pairing
    rho_z = [rep.act(z) for z in pairing.dual_basis]
    for xa in pairing.quotient_basis:
        total = ExactMatrix(rep.dim, rep.dim)
        for i, xi in enumerate(pairing.quotient_basis):
            value = kappa_on_g(ext, kappa, {xa: ONE}, {xi: ONE})
            if value:
                total = total + rep.act(value) @ rho_z[i]
        if not total.is_zero():
            return False
    return True


def filtration_preservation(conn: ConnectionMap) -> bool:
    """True iff Phi(e_j) maps V^l into V^{l + deg e_j}: every entry shifts the rho(E)-weight by at least deg e_j."""
    weights = representation_weights(conn.rep, conn.ext.target)
    degrees = conn.ext.source.degrees
    for j, m in enumerate(conn.phi):
        for r, c, _ in m.nonzero_entries():
            if (weights[r] - weights[c]).to_fraction() < degrees[j]:
                return False
    return True
