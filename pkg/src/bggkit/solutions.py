"""Solution spaces S^infinity, infinitesimal holonomy, normal and invariant solutions."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .connection import ConnectionMap, connection_curvature, tractor_connection
from .extension import ExtensionMap
from .field import ZERO
from .lie import RepresentationSpec, build_representation
from .linalg import EchelonBasis, ExactMatrix, Subspace, Vector, nullspace_rows


class HolonomyError(RuntimeError):
    """Raised when the holonomy closure fails to stabilize."""


@dataclass(frozen=True)
class SolutionSpace:
    space: Subspace
    chain: tuple[Subspace, ...]
    connection_kind: str
    normal_subspace: Subspace | None = None
    invariant_subspace: Subspace | None = None

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def chain_dims(self) -> list[int]:
        return [s.dim for s in self.chain]


def _functionals(space: Subspace) -> list[Vector]:
    return space.constraints()


def s_chain(conn: ConnectionMap) -> list[Subspace]:
    """S^0 = common kernel of the curvature values, S^k = {v in S^{k-1}: Phi(e_i) v in S^{k-1}}."""
    n = conn.dim
    curv = connection_curvature(conn)
    rows = [row for m in curv.nonzero() for row in m.rows if row]
    current = nullspace_rows(rows, n)
    chain = [current]
    phi_t = [m for m in conn.phi]
    for _ in range(n + 1):
        constraints = _functionals(current)
        new_rows = list(constraints)
        for c in constraints:
            for m in phi_t:
                # functional c o Phi(e_i)
                row: Vector = {}
                for r, value in c.items():
                    for col, entry in m.rows[r].items():
                        row[col] = row.get(col, ZERO) + value * entry
                row = {k: v for k, v in row.items() if v}
                if row:
                    new_rows.append(row)
        nxt = nullspace_rows(new_rows, n)
        chain.append(nxt)
        if nxt.dim == current.dim:
            return chain
        current = nxt
    raise RuntimeError("the S^k chain did not stabilize")


def invariant_solutions(conn: ConnectionMap, space: Subspace | None = None) -> Subspace:
    """{v in S^infinity : Phi(e_i) v = 0 for all i}."""
    space = space if space is not None else s_chain(conn)[-1]
    rows = [row for m in conn.phi for row in m.rows if row]
    return space.intersect(nullspace_rows(rows, conn.dim))


def solve_s_infinity(conn: ConnectionMap, normal: Subspace | None = None) -> SolutionSpace:
    chain = s_chain(conn)
    space = chain[-1]
    invariant = invariant_solutions(conn, space)
    if normal is None and conn.kind == "tractor":
        normal = space
    return SolutionSpace(space, tuple(chain), conn.kind, normal, invariant)


def normal_solutions(ext: ExtensionMap, rep: RepresentationSpec) -> Subspace:
    """S^infinity of the tractor connection rho o alpha."""
    return s_chain(tractor_connection(ext, rep))[-1]


def normal_part(solutions: Subspace, ext: ExtensionMap, rep: RepresentationSpec) -> Subspace:
    return solutions.intersect(normal_solutions(ext, rep))


@dataclass(frozen=True)
class HolonomyAlgebra:
    generators: tuple[ExactMatrix, ...]
    span: Subspace
    bracket_closed: bool
    size: int

    @property
    def dim(self) -> int:
        return self.span.dim

    def matrices(self) -> list[ExactMatrix]:
        return [ExactMatrix.unflatten(v, self.size, self.size) for v in self.span.basis]

    def annihilates(self, space: Subspace) -> bool:
        return all(not m.apply(v) for m in self.matrices() for v in space.basis)


def holonomy(conn: ConnectionMap, max_rounds: int | None = None, full_bracket_check: int = 2000) -> HolonomyAlgebra:
    """Smallest subspace of gl(V) containing R(e_i, e_j), stable under ad(Phi(e_i)) and commutators.

    The span is closed under ad of the generators Phi(e_i) and a basis of the curvature values only:
    {Y : [Y, L] in L} is a Lie algebra by Jacobi, so it contains every generator and hence L itself,
    which makes L bracket-closed. ``bracket_closed`` re-checks all pairs when there are at most
    ``full_bracket_check`` of them, and member-generator pairs otherwise.
    """
    n = conn.dim
    curv = connection_curvature(conn)
    generators = tuple(curv.nonzero())
    ech = EchelonBasis(n * n)
    members: list[ExactMatrix] = []
    queue: list[ExactMatrix] = []

    def push(m: ExactMatrix) -> None:
        if m.is_zero():
            return
        if ech.add(m.flatten()):
            members.append(m)
            queue.append(m)

    for m in generators:
        push(m)
    curvature_basis = list(members)
    acting = list(conn.phi) + curvature_basis
    limit = max_rounds if max_rounds is not None else n * n + 1
    steps = 0
    while queue:
        steps += 1
        if steps > limit:
            raise HolonomyError("holonomy closure did not stabilize")
        m = queue.pop(0)
        for a in acting:
            push(a.commutator(m))
    span = Subspace.from_echelon(ech)
    if len(members) * (len(members) - 1) // 2 <= full_bracket_check:
        pairs = itertools.combinations(members, 2)
    else:
        pairs = ((a, b) for a in members for b in curvature_basis)
    closed = all(span.contains_vector(a.commutator(b).flatten()) for a, b in pairs)
    return HolonomyAlgebra(generators, span, closed, n)


def couple(sv: Vector, sw: Vector, rep_v: RepresentationSpec, rep_w: RepresentationSpec) -> Vector:
    """sv (x) sw in V (x) W with index i * dim W + j."""
    out: Vector = {}
    for i, a in sv.items():
        for j, b in sw.items():
            out[i * rep_w.dim + j] = a * b
    return out


def coupled_representation(rep_v: RepresentationSpec, rep_w: RepresentationSpec) -> RepresentationSpec:
    rep = build_representation(rep_v, "tensor", rep_w)
    rep.labels = [f"w{k + 1}" for k in range(rep.dim)]
    return rep


def couple_checked(ext: ExtensionMap, sv: Vector, sw: Vector, rep_v: RepresentationSpec,
                   rep_w: RepresentationSpec) -> tuple[Vector, RepresentationSpec]:
    """Couple two normal solutions, rejecting inputs that are not normal."""
    if not normal_solutions(ext, rep_v).contains_vector(sv):
        raise ValueError("first argument is not a normal solution")
    if not normal_solutions(ext, rep_w).contains_vector(sw):
        raise ValueError("second argument is not a normal solution")
    return couple(sv, sw, rep_v, rep_w), coupled_representation(rep_v, rep_w)
