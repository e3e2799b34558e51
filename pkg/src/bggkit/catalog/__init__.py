"""Catalog of homogeneous parabolic geometries stored as YAML data files."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import yaml

from ..expr import Polynomial, parse_polynomial, parse_scalar
from ..extension import ExtensionMap, GaugeConstraint
from ..field import Scalar
from ..lie import (
    GradedParabolicData,
    LieAlgebraSpec,
    RepresentationSpec,
    StructureError,
    SymmetryPair,
    adjoint_representation,
    algebra_from_matrices,
    build_representation,
    matrix_algebra_representation,
    standard_representation,
    trivial_representation,
    validate_representation,
)
from ..linalg import ExactMatrix, Vector

EXAMPLE_NAMES = ("projective-heis", "cprojective", "g2-rolling", "cr-tube", "lagrangian-contact", "path-ode")

SCHEMA_VERSION = 1


class CatalogError(ValueError):
    """Raised for unknown geometries or malformed geometry files."""


def parse_matrix_template(text: str) -> list[list[Polynomial]]:
    rows = [line for line in text.strip().splitlines() if line.strip()]
    matrix = [[parse_polynomial(cell.strip()) for cell in row.split(",")] for row in rows]
    if any(len(row) != len(matrix) for row in matrix):
        raise CatalogError("matrix templates must be square")
    return matrix


def template_coefficient(template: list[list[Polynomial]], variable: str) -> ExactMatrix:
    """Matrix of coefficients of ``variable`` in a template linear in its parameters."""
    n = len(template)
    entries = []
    for r in range(n):
        for c in range(n):
            value = template[r][c].linear_coefficient(variable)
            if value:
                entries.append((r, c, value))
    return ExactMatrix.from_entries(n, n, entries)


def _check_linear(template: list[list[Polynomial]], variables: list[str]) -> None:
    for row in template:
        for cell in row:
            cell.linear_part(variables)


def _split_args(text: str) -> list[str]:
    depth, start, out = 0, 0, []
    for pos, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            out.append(text[start:pos].strip())
            start = pos + 1
    out.append(text[start:].strip())
    return out


def default_labels(dim: int) -> list[str]:
    return [f"w{k + 1}" for k in range(dim)]


def matrix_labels(n: int) -> list[str]:
    """Row-major labels m_rc (1-based) for entries of an n x n matrix."""
    return [f"m{r + 1}{c + 1}" for r in range(n) for c in range(n)]


@dataclass
class GeometryBundle:
    """All data of one catalog geometry: (g, p), (k, h), extensions, reps, fixtures."""

    name: str
    description: str
    g_data: GradedParabolicData
    k_data: SymmetryPair
    g_parameters: list[str]
    coordinates: list[str]
    gr_alpha: ExtensionMap | None
    alpha: ExtensionMap
    gauge: list[GaugeConstraint]
    rep_expressions: dict[str, str]
    factor_decomposition: list[dict]
    fixtures: list[dict]
    raw: dict = field(repr=False, default_factory=dict)
    _reps: dict = field(repr=False, default_factory=dict)

    @property
    def rep_names(self) -> list[str]:
        return list(self.rep_expressions)

    def rep(self, name: str) -> RepresentationSpec:
        if name not in self._reps:
            if name not in self.rep_expressions:
                raise CatalogError(f"unknown representation {name!r}; available: {', '.join(self.rep_names)}")
            rep = self._build_rep(self.rep_expressions[name], set())
            rep.name = name
            self._reps[name] = rep
        return self._reps[name]

    def _build_rep(self, expr: str, seen: set[str]) -> RepresentationSpec:
        expr = expr.strip()
        g = self.g_data
        if expr == "standard":
            rep = standard_representation(g)
        elif expr == "adjoint":
            rep = adjoint_representation(g)
        elif expr == "gl":
            rep = matrix_algebra_representation(g)
            rep.labels = matrix_labels(g.matrices[0].nrows)
            return rep
        elif expr == "trivial":
            rep = trivial_representation(g)
        elif expr in self.rep_expressions:
            if expr in seen:
                raise CatalogError(f"cyclic representation definition {expr!r}")
            return self._build_rep(self.rep_expressions[expr], seen | {expr})
        else:
            match = re.fullmatch(r"(\w+)\((.*)\)", expr)
            if not match:
                raise CatalogError(f"cannot parse representation expression {expr!r}")
            ctor, inner = match.groups()
            args = _split_args(inner)
            if ctor == "tensor":
                if len(args) != 2:
                    raise CatalogError("tensor takes two arguments")
                rep = build_representation(self._build_rep(args[0], seen), "tensor", self._build_rep(args[1], seen))
            elif ctor in ("dual", "conjugate", "sym2", "alt2"):
                if len(args) != 1:
                    raise CatalogError(f"{ctor} takes one argument")
                rep = build_representation(self._build_rep(args[0], seen), ctor)
            else:
                raise CatalogError(f"unknown representation constructor {ctor!r}")
        if rep.labels is None:
            rep.labels = default_labels(rep.dim)
        return rep

    def fixtures_for(self, rep: str, connection: str | None = None) -> list[dict]:
        return [f for f in self.fixtures if f["rep"] == rep and (connection is None or f["connection"] == connection)]

    def validate(self) -> list:
        """Structural certificates for the whole bundle, in a fixed order."""
        reports = [self.g_data.validate(), self.k_data.validate(), self.alpha.validate()]
        if self.gr_alpha is not None:
            # the graded extension extends gr(k), not k itself
            graded = ExtensionMap(self.gr_alpha.alpha, self.k_data.associated_graded(), self.g_data)
            reports.append(graded.validate())
        for name in self.rep_names:
            report = validate_representation(self.rep(name), self.g_data.algebra)
            report.check = f"representation {name}"
            reports.append(report)
        return reports


def _grading_vector(params: list[str], text: str) -> Vector:
    poly = parse_polynomial(text)
    coeffs = poly.linear_part(params)
    return {params.index(name): value for name, value in coeffs.items()}


def _load_g(data: dict) -> tuple[GradedParabolicData, list[str]]:
    params = [str(p[0]) for p in data["parameters"]]
    grading = [int(p[1]) for p in data["parameters"]]
    template = parse_matrix_template(data["template"])
    if len(template) != int(data["size"]):
        raise CatalogError("template size mismatch")
    _check_linear(template, params)
    matrices = [template_coefficient(template, p) for p in params]
    algebra, coords = algebra_from_matrices(params, matrices)
    grading_element = _grading_vector(params, data["grading_element"])
    g = GradedParabolicData(algebra, grading, grading_element, matrices, data.get("pairing_form", "trace"))
    g._coords = coords
    return g, params


def _load_k(data: dict) -> SymmetryPair:
    names = [str(n) for n in data["basis"]]
    triples = [(int(i) - 1, int(j) - 1, int(k) - 1, parse_scalar(c)) for i, j, k, c in data.get("brackets", [])]
    algebra = LieAlgebraSpec.from_triples(names, triples)
    isotropy = [names.index(str(n)) for n in data.get("isotropy", [])]
    degrees = [int(d) for d in data["degrees"]]
    if len(degrees) != len(names):
        raise CatalogError("one degree per basis element of k is required")
    return SymmetryPair(algebra, isotropy, degrees)


def _load_extension(text: str, coords: list[str], g: GradedParabolicData, k: SymmetryPair) -> ExtensionMap:
    template = parse_matrix_template(text)
    _check_linear(template, coords)
    columns = []
    for name in coords:
        m = template_coefficient(template, name)
        try:
            columns.append(g.from_matrix(m))
        except StructureError as exc:
            raise CatalogError(f"image of {name} is not in g") from exc
    return ExtensionMap(ExactMatrix.from_columns(g.dim, columns), k, g)


def _column_indices(spec: Any, k: SymmetryPair) -> list[int] | None:
    if spec in (None, "all"):
        return None
    return [k.algebra.names.index(str(name)) for name in spec]


def _load_gauge(items: list[dict], g: GradedParabolicData, params: list[str], k: SymmetryPair) -> list[GaugeConstraint]:
    out = []
    n = g.matrices[0].nrows if g.matrices else 0
    entry_names = {f"m{r + 1}{c + 1}": (r, c) for r in range(n) for c in range(n)}
    for item in items or []:
        columns = _column_indices(item.get("columns"), k)
        if "grade" in item:
            out.append(GaugeConstraint("grade", columns, grade=int(item["grade"])))
            continue
        poly = parse_polynomial(item["functional"])
        variables = poly.variables()
        if variables <= set(entry_names):
            coeffs = poly.linear_part(entry_names)
            out.append(GaugeConstraint("entry", columns, {entry_names[v]: c for v, c in coeffs.items()}))
        elif variables <= set(params):
            coeffs = poly.linear_part(params)
            out.append(GaugeConstraint("coefficient", columns, {params.index(v): c for v, c in coeffs.items()}))
        else:
            raise CatalogError(f"gauge functional {item['functional']!r} mixes unknown names")
    return out


def load_bundle(data: dict) -> GeometryBundle:
    if int(data.get("schema_version", 0)) != SCHEMA_VERSION:
        raise CatalogError(f"unsupported schema version {data.get('schema_version')!r}")
    g, params = _load_g(data["g"])
    k = _load_k(data["k"])
    ext = data["extension"]
    coords = [str(c) for c in ext["coordinates"]]
    if len(coords) != k.dim:
        raise CatalogError("one coordinate per basis element of k is required")
    alpha = _load_extension(ext["alpha"], coords, g, k)
    gr_alpha = _load_extension(ext["gr_alpha"], coords, g, k) if "gr_alpha" in ext else None
    gauge = _load_gauge(ext.get("gauge", []), g, params, k)
    fixtures = []
    for item in data.get("fixtures", []):
        entry = dict(item)
        entry.setdefault("connection", "prolongation")
        fixtures.append(entry)
    return GeometryBundle(
        name=data["name"],
        description=data.get("description", ""),
        g_data=g,
        k_data=k,
        g_parameters=params,
        coordinates=coords,
        gr_alpha=gr_alpha,
        alpha=alpha,
        gauge=gauge,
        rep_expressions={str(key): str(value) for key, value in data.get("reps", {}).items()},
        factor_decomposition=list(data.get("factors", [])),
        fixtures=fixtures,
        raw=data,
    )


def _data_path(name: str):
    return resources.files(__package__).joinpath("data", f"{name}.yaml")


_CACHE: dict[str, GeometryBundle] = {}


def load_example(name: str) -> GeometryBundle:
    """Load a catalog geometry by name."""
    if name not in EXAMPLE_NAMES:
        raise CatalogError(f"unknown geometry {name!r}; valid names: {', '.join(EXAMPLE_NAMES)}")
    if name not in _CACHE:
        text = _data_path(name).read_text()
        _CACHE[name] = load_bundle(yaml.safe_load(text))
    return _CACHE[name]


def load_geometry(source: str) -> GeometryBundle:
    """A catalog name or a path to a geometry YAML file."""
    if source in EXAMPLE_NAMES:
        return load_example(source)
    path = Path(source)
    if path.is_file():
        return load_bundle(yaml.safe_load(path.read_text()))
    raise CatalogError(f"unknown geometry {source!r}; valid names: {', '.join(EXAMPLE_NAMES)}")


def scalar_text(value: Scalar) -> str:
    return str(value)
