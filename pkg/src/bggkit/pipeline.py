"""Run the solver stages for one (geometry, representation, connection) and compare with fixtures."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Any

from .catalog import GeometryBundle, load_geometry
from .connection import (
    ConnectionMap,
    ProlongationReport,
    automorphism_connection,
    prolong,
    tractor_connection,
)
from .expr import parse_polynomial
from .field import ZERO
from .kostant import FormSpaces, q_polynomial
from .lie import RepresentationSpec
from .linalg import Subspace, Vector
from .solutions import HolonomyAlgebra, holonomy, invariant_solutions, normal_solutions, s_chain

REPORT_SCHEMA_VERSION = 1

CONNECTION_KINDS = ("tractor", "prolongation", "automorphism")


class PipelineError(RuntimeError):
    """A stage failure, tagged with the stage name."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


def build_connection(bundle: GeometryBundle, rep: RepresentationSpec, kind: str) -> tuple[ConnectionMap, ProlongationReport | None]:
    if kind == "tractor":
        return tractor_connection(bundle.alpha, rep), None
    if kind == "prolongation":
        return prolong(tractor_connection(bundle.alpha, rep))
    if kind == "automorphism":
        return automorphism_connection(bundle.alpha, rep), None
    raise PipelineError("connection", f"unknown connection kind {kind!r}; expected one of {', '.join(CONNECTION_KINDS)}")


def labelled(vec: Vector, labels: list[str]) -> dict[str, str]:
    return {labels[i]: str(vec[i]) for i in sorted(vec)}


@dataclass
class FixtureVerdict:
    key: str
    passed: bool
    expected: Any
    actual: Any

    def to_dict(self) -> dict:
        return {"key": self.key, "passed": self.passed, "expected": self.expected, "actual": self.actual}


@dataclass
class RunResult:
    """Exact objects computed by the pipeline, kept for programmatic use."""

    bundle: GeometryBundle
    rep: RepresentationSpec
    connection: ConnectionMap
    prolongation: ProlongationReport | None
    chain: list[Subspace]
    normal: Subspace | None
    invariant: Subspace
    _holonomy: HolonomyAlgebra | None = None
    _q: Any = None

    @property
    def solutions(self) -> Subspace:
        return self.chain[-1]

    @property
    def holonomy(self) -> HolonomyAlgebra:
        if self._holonomy is None:
            self._holonomy = holonomy(self.connection)
        return self._holonomy

    @property
    def q(self):
        if self._q is None:
            self._q = q_polynomial(FormSpaces(self.bundle.g_data, self.rep))
        return self._q


@dataclass
class RunReport:
    geometry: str
    rep: str
    connection: str
    rep_dim: int
    chain_dims: list[int]
    solution_basis: list[dict[str, str]]
    normal_basis: list[dict[str, str]] | None
    invariant_basis: list[dict[str, str]]
    holonomy_dim: int | None = None
    holonomy_closed: bool | None = None
    holonomy_basis: list[list[list]] | None = None
    psi: dict[str, str] = field(default_factory=dict)
    prolongation_iterations: int | None = None
    q_coefficients: list[str] | None = None
    verdicts: list[FixtureVerdict] = field(default_factory=list)
    timing: dict[str, float] | None = None

    @property
    def solution_dim(self) -> int:
        return len(self.solution_basis)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def to_dict(self) -> dict:
        out = {
            "schema_version": REPORT_SCHEMA_VERSION,
            "geometry": self.geometry,
            "rep": self.rep,
            "connection": self.connection,
            "rep_dim": self.rep_dim,
            "chain_dims": self.chain_dims,
            "solution_dim": self.solution_dim,
            "solution_basis": self.solution_basis,
            "normal_dim": None if self.normal_basis is None else len(self.normal_basis),
            "normal_basis": self.normal_basis,
            "invariant_dim": len(self.invariant_basis),
            "invariant_basis": self.invariant_basis,
            "holonomy_dim": self.holonomy_dim,
            "holonomy_closed": self.holonomy_closed,
            "holonomy_basis": self.holonomy_basis,
            "psi": self.psi,
            "prolongation_iterations": self.prolongation_iterations,
            "q_coefficients": self.q_coefficients,
            "verdicts": [v.to_dict() for v in self.verdicts],
            "passed": self.passed,
        }
        if self.timing is not None:
            out["timing"] = self.timing
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = [
            f"geometry: {self.geometry}",
            f"representation: {self.rep} (dim {self.rep_dim})",
            f"connection: {self.connection}",
            f"S^k chain dims: {self.chain_dims}",
            f"dim S^inf: {self.solution_dim}",
        ]
        lines += [f"  {_vector_text(v)}" for v in self.solution_basis]
        if self.normal_basis is not None:
            lines.append(f"normal solutions: dim {len(self.normal_basis)}")
            lines += [f"  {_vector_text(v)}" for v in self.normal_basis]
        lines.append(f"invariant solutions: dim {len(self.invariant_basis)}")
        lines += [f"  {_vector_text(v)}" for v in self.invariant_basis]
        if self.holonomy_dim is not None:
            lines.append(f"holonomy: dim {self.holonomy_dim}, bracket-closed {self.holonomy_closed}")
        if self.psi:
            lines.append("psi:")
            lines += [f"  {label} += {poly}" for label, poly in self.psi.items()]
        if self.q_coefficients is not None:
            lines.append(f"Q coefficients: {', '.join(self.q_coefficients)}")
        for v in self.verdicts:
            lines.append(f"[{'PASS' if v.passed else 'FAIL'}] {v.key}: expected {v.expected}, got {v.actual}")
        if self.timing is not None:
            lines.append("timing: " + ", ".join(f"{k} {t:.3f}s" for k, t in self.timing.items()))
        return "\n".join(lines)


def _vector_text(vec: dict[str, str]) -> str:
    return " + ".join(f"({value})*{label}" for label, value in vec.items()) or "0"


def compute(bundle: GeometryBundle, rep_name: str, kind: str = "prolongation", timing: dict | None = None) -> RunResult:
    clock = time.perf_counter()

    def tick(stage: str) -> None:
        nonlocal clock
        if timing is not None:
            now = time.perf_counter()
            timing[stage] = round(now - clock, 6)
            clock = now

    try:
        rep = bundle.rep(rep_name)
    except Exception as exc:
        raise PipelineError("representation", str(exc)) from exc
    try:
        conn, report = build_connection(bundle, rep, kind)
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError("connection", str(exc)) from exc
    tick("connection")
    try:
        chain = s_chain(conn)
        space = chain[-1]
        normal = space if kind == "tractor" else (space.intersect(normal_solutions(bundle.alpha, rep)) if kind == "prolongation" else None)
        invariant = invariant_solutions(conn, space)
    except Exception as exc:
        raise PipelineError("solve", str(exc)) from exc
    tick("solve")
    return RunResult(bundle, rep, conn, report, chain, normal, invariant)


def _basis(space: Subspace, labels: list[str]) -> list[dict[str, str]]:
    return [labelled(v, labels) for v in space.basis]


def _functional(text: str, labels: list[str]) -> Vector:
    poly = parse_polynomial(text)
    if poly.constant_term():
        raise PipelineError("fixtures", f"relation {text!r} is not homogeneous linear")
    coeffs = poly.linear_part(labels)
    return {labels.index(name): value for name, value in coeffs.items()}


def _annihilates(functional: Vector, space: Subspace) -> bool:
    return all(not sum((c * v.get(i, ZERO) for i, c in functional.items()), ZERO) for v in space.basis)


def _support(space: Subspace, labels: list[str]) -> list[str]:
    indices = sorted({i for v in space.basis for i in v})
    return [labels[i] for i in indices]


def _trace_quotient_dim(space: Subspace, rep: RepresentationSpec) -> int:
    if rep.trace_direction is None:
        return space.dim
    return Subspace.from_vectors(space.ambient_dim, list(space.basis) + [rep.trace_direction]).dim - 1


def check_fixture(result: RunResult, fixture: dict) -> list[FixtureVerdict]:
    """One verdict per recognised key of the fixture."""
    labels = result.rep.labels
    space = result.solutions
    verdicts = []

    def add(key: str, expected, actual) -> None:
        verdicts.append(FixtureVerdict(key, expected == actual, expected, actual))

    def relations(key: str, target: Subspace | None) -> None:
        texts = fixture[key]
        if target is None:
            add(key, texts, "not computed")
            return
        failing = [t for t in texts if not _annihilates(_functional(t, labels), target)]
        verdicts.append(FixtureVerdict(key, not failing, texts, failing or texts))

    if "solution_dim" in fixture:
        add("solution_dim", int(fixture["solution_dim"]), space.dim)
    if "solution_dim_without_trace" in fixture:
        add("solution_dim_without_trace", int(fixture["solution_dim_without_trace"]), _trace_quotient_dim(space, result.rep))
    if "normal_dim" in fixture:
        add("normal_dim", int(fixture["normal_dim"]), None if result.normal is None else result.normal.dim)
    if "invariant_dim" in fixture:
        add("invariant_dim", int(fixture["invariant_dim"]), result.invariant.dim)
    if "support" in fixture:
        add("support", sorted(fixture["support"], key=labels.index), _support(space, labels))
    if "normal_support" in fixture and result.normal is not None:
        add("normal_support", sorted(fixture["normal_support"], key=labels.index), _support(result.normal, labels))
    for key, target in (("relations", space), ("normal_relations", result.normal), ("invariant_relations", result.invariant)):
        if key in fixture:
            relations(key, target)
    if "holonomy_dim" in fixture:
        add("holonomy_dim", int(fixture["holonomy_dim"]), result.holonomy.dim)
        add("holonomy_closed", True, result.holonomy.bracket_closed)
    if "holonomy_support" in fixture:
        positions = sorted({(r + 1, c + 1) for m in result.holonomy.matrices() for r, c, _ in m.nonzero_entries()})
        add("holonomy_support", sorted(tuple(p) for p in fixture["holonomy_support"]), positions)
    if fixture.get("psi_zero"):
        add("psi_zero", True, all(m.is_zero() for m in result.connection.psi))
    if "psi" in fixture:
        table = result.connection.psi_table(result.bundle.coordinates)
        for label, text in fixture["psi"].items():
            add(f"psi[{label}]", str(parse_polynomial(text)), str(table[labels.index(label)]))
    if "q_coefficients" in fixture:
        expected = [str(parse_polynomial(t)) for t in fixture["q_coefficients"]]
        add("q_coefficients", expected, [str(c) for c in result.q.coefficients])
    if fixture.get("contains_alpha_k"):
        rep = result.rep
        ok = rep.is_adjoint_type and all(
            space.contains_vector(rep.from_algebra.apply(result.bundle.alpha.image(j))) for j in range(result.bundle.k_data.dim)
        )
        add("contains_alpha_k", True, ok)
    return verdicts


def run_pipeline(geometry: str | GeometryBundle, rep: str, connection: str = "prolongation", *,
                 with_holonomy: bool = False, with_q: bool = False, with_timing: bool = False) -> RunReport:
    """normalize-checked bundle -> connection -> S^inf -> normal/invariant -> holonomy -> verdicts."""
    try:
        bundle = load_geometry(geometry) if isinstance(geometry, str) else geometry
    except Exception as exc:
        raise PipelineError("load", str(exc)) from exc
    timing: dict[str, float] | None = {} if with_timing else None
    result = compute(bundle, rep, connection, timing)
    labels = result.rep.labels
    fixtures = bundle.fixtures_for(rep, connection)
    verdicts = [v for f in fixtures for v in check_fixture(result, f)]
    report = RunReport(
        geometry=bundle.name,
        rep=rep,
        connection=connection,
        rep_dim=result.rep.dim,
        chain_dims=[s.dim for s in result.chain],
        solution_basis=_basis(result.solutions, labels),
        normal_basis=None if result.normal is None else _basis(result.normal, labels),
        invariant_basis=_basis(result.invariant, labels),
        psi={labels[i]: str(p) for i, p in enumerate(result.connection.psi_table(bundle.coordinates)) if not p.is_zero()},
        prolongation_iterations=None if result.prolongation is None else result.prolongation.iterations,
        verdicts=verdicts,
    )
    if with_holonomy or any("holonomy_dim" in f or "holonomy_support" in f for f in fixtures):
        hol = result.holonomy
        report.holonomy_dim = hol.dim
        report.holonomy_closed = hol.bracket_closed
        report.holonomy_basis = [[[r + 1, c + 1, str(v)] for r, c, v in m.nonzero_entries()] for m in hol.matrices()]
    if with_q or any("q_coefficients" in f for f in fixtures):
        report.q_coefficients = [str(c) for c in result.q.coefficients]
    if timing is not None:
        report.timing = timing
    return report


def fixture_jobs(bundle: GeometryBundle) -> list[tuple[str, str]]:
    """Distinct (rep, connection) pairs with fixtures, in file order."""
    seen: list[tuple[str, str]] = []
    for f in bundle.fixtures:
        key = (f["rep"], f["connection"])
        if key not in seen:
            seen.append(key)
    return seen
