"""Reader for ``.qla`` definition files.

A definition file is line oriented and split into ``[section]`` blocks; ``#``
starts a comment. Expressions use the polynomial grammar of :mod:`qla.gpoly`.

    [chart]                      name parity [weight]
    [fiber]                      basis-name parity [shifted-coordinate-name]
    [anchor]                     basis coord = expr           (Q^coord_basis)
    [brackets]                   a b -> c = expr              ([t_a, t_b] has t_c-coefficient expr)
    [structure]                  a b -> c = expr              (Q^c_{a b})
    [sections]                   name parity: basis = expr; basis = expr
    [density]                    sigma = expr                 (over the shifted chart)
    [bundle NAME]                frame e parity | frame fiber | gamma a e -> f = expr | adjoint [scale]
    [morphism NAME]              target = path | source_q = name | target_q = name
                                 base y = expr | fiber a -> m = expr

Pairs given in only one order in [brackets] or [structure] are completed by
graded antisymmetry; pairs given in both orders must agree.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from qla.algebroid import AlgebroidData, FiberElement, Section, StructureError, complete_structure
from qla.connection import BundleData, Connection
from qla.gpoly import Coord, GradedPoly, ParseError, SuperChart, parse_parity, sign
from qla.modular import LogDensity
from qla.morphism import BundleMorphism

FIXTURE_DIR = Path(__file__).parent / "fixtures"


class DefinitionError(ValueError):
    def __init__(self, message: str, path: str | None = None, line: int | None = None, field: str | None = None):
        self.path = path
        self.line = line
        self.field = field
        where = ""
        if path:
            where += str(path)
        if line is not None:
            where += f":{line}"
        if field:
            where += f" [{field}]"
        super().__init__(f"{where}: {message}" if where else message)


@dataclass
class MorphismSpec:
    name: str
    target: str | None = None
    source_q: str | None = None
    target_q: str | None = None
    base: dict[str, tuple[str, int]] = field(default_factory=dict)
    fiber: dict[tuple[str, str], tuple[str, int]] = field(default_factory=dict)
    line: int = 0


@dataclass
class Definition:
    path: str
    data: AlgebroidData
    sections: dict[str, Section]
    density: LogDensity | None = None
    connections: dict[str, Connection] = field(default_factory=dict)
    morphisms: dict[str, MorphismSpec] = field(default_factory=dict)

    def section(self, name: str) -> Section:
        try:
            return self.sections[name]
        except KeyError:
            known = ", ".join(sorted(self.sections)) or "none"
            raise DefinitionError(f"no section named {name!r} (known: {known})", self.path) from None


_HEADER = re.compile(r"\[\s*([A-Za-z_]+)(?:\s+([A-Za-z0-9_.\-]+))?\s*\]\Z")
_ARROW = re.compile(r"(\S+)\s+(\S+)\s*->\s*(\S+)\s*=\s*(.+)\Z")


def resolve_path(path: str | Path) -> Path:
    """A path on disk, falling back to the bundled fixtures directory."""
    p = Path(path)
    if p.exists():
        return p
    alt = FIXTURE_DIR / p.name
    if alt.exists():
        return alt
    alt = FIXTURE_DIR / f"{p.name}.qla"
    if alt.exists():
        return alt
    raise DefinitionError(f"file not found: {path}")


def _blocks(text: str, path: str):
    blocks = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            m = _HEADER.match(line)
            if not m:
                raise DefinitionError(f"malformed section header {line!r}", path, lineno)
            current = (m.group(1).lower(), m.group(2), lineno, [])
            blocks.append(current)
            continue
        if current is None:
            raise DefinitionError("content before the first [section] header", path, lineno)
        current[3].append((lineno, line))
    return blocks


def _expr(text: str, chart: SuperChart, path: str, lineno: int, what: str) -> GradedPoly:
    try:
        return chart.parse(text)
    except ParseError as exc:
        raise DefinitionError(f"cannot parse {what}: {exc}", path, lineno, what) from None


def loads(text: str, path: str = "<string>") -> Definition:
    blocks = _blocks(text, path)
    known = {"chart", "fiber", "anchor", "brackets", "structure", "sections", "density", "bundle", "morphism"}
    for kind, _, lineno, _ in blocks:
        if kind not in known:
            raise DefinitionError(f"unknown section [{kind}]", path, lineno)

    def single(kind):
        found = [b for b in blocks if b[0] == kind]
        if len(found) > 1:
            raise DefinitionError(f"section [{kind}] appears more than once", path, found[1][2])
        return found[0][3] if found else []

    coords = []
    for lineno, line in single("chart"):
        parts = line.split()
        if len(parts) not in (2, 3):
            raise DefinitionError("expected 'name parity [weight]'", path, lineno, "chart")
        try:
            w = int(parts[2]) if len(parts) == 3 else 0
            coords.append(Coord(parts[0], parse_parity(parts[1]), w))
        except ValueError as exc:
            raise DefinitionError(str(exc), path, lineno, "chart") from None
    try:
        chart = SuperChart(coords)
    except ValueError as exc:
        raise DefinitionError(str(exc), path, None, "chart") from None

    fiber = []
    for lineno, line in single("fiber"):
        parts = line.split()
        if len(parts) not in (2, 3):
            raise DefinitionError("expected 'basis parity [coordinate]'", path, lineno, "fiber")
        try:
            fiber.append(FiberElement(parts[0], parse_parity(parts[1]), parts[2] if len(parts) == 3 else ""))
        except ValueError as exc:
            raise DefinitionError(str(exc), path, lineno, "fiber") from None
    fpar = {f.name: f.parity for f in fiber}

    def need_basis(name, lineno, what):
        if name not in fpar:
            raise DefinitionError(f"undeclared fiber basis element {name!r}", path, lineno, what)

    anchor = {}
    for lineno, line in single("anchor"):
        lhs, eq, rhs = line.partition("=")
        parts = lhs.split()
        if not eq or len(parts) != 2:
            raise DefinitionError("expected 'basis coordinate = expr'", path, lineno, "anchor")
        need_basis(parts[0], lineno, "anchor")
        if parts[1] not in chart:
            raise DefinitionError(f"undeclared coordinate {parts[1]!r}", path, lineno, "anchor")
        key = (parts[0], parts[1])
        if key in anchor:
            raise DefinitionError(f"anchor component {key} given twice", path, lineno, "anchor")
        anchor[key] = _expr(rhs.strip(), chart, path, lineno, "anchor")

    structure = {}
    for kind in ("brackets", "structure"):
        for lineno, line in single(kind):
            m = _ARROW.match(line)
            if not m:
                raise DefinitionError("expected 'a b -> c = expr'", path, lineno, kind)
            a, b, c, rhs = m.groups()
            for n in (a, b, c):
                need_basis(n, lineno, kind)
            val = _expr(rhs.strip(), chart, path, lineno, kind)
            if kind == "brackets":
                val = val.scale(sign(fpar[b]))
            key = (c, a, b)
            if key in structure:
                raise DefinitionError(f"structure function for ({a}, {b}) -> {c} given twice", path, lineno, kind)
            structure[key] = val

    try:
        data = AlgebroidData(chart, fiber, anchor, complete_structure(tuple(fiber), structure))
    except StructureError as exc:
        raise DefinitionError(str(exc), path, None, "structure") from None

    sections = {}
    for lineno, line in single("sections"):
        head, colon, body = line.partition(":")
        parts = head.split()
        if not colon or len(parts) != 2:
            raise DefinitionError("expected 'name parity: basis = expr; ...'", path, lineno, "sections")
        name = parts[0]
        try:
            par = parse_parity(parts[1])
        except ValueError as exc:
            raise DefinitionError(str(exc), path, lineno, "sections") from None
        comps = {}
        for item in filter(None, (s.strip() for s in body.split(";"))):
            b, eq, rhs = item.partition("=")
            b = b.strip()
            if not eq:
                raise DefinitionError(f"expected 'basis = expr', got {item!r}", path, lineno, "sections")
            need_basis(b, lineno, "sections")
            comps[b] = _expr(rhs.strip(), chart, path, lineno, f"section {name}")
        if name in sections:
            raise DefinitionError(f"section {name!r} defined twice", path, lineno, "sections")
        try:
            sections[name] = Section(data, par, comps)
        except ValueError as exc:
            raise DefinitionError(str(exc), path, lineno, "sections") from None

    density = None
    for lineno, line in single("density"):
        lhs, eq, rhs = line.partition("=")
        if lhs.strip() != "sigma" or not eq:
            raise DefinitionError("expected 'sigma = expr'", path, lineno, "density")
        sigma = _expr(rhs.strip(), data.pi_chart, path, lineno, "density")
        try:
            density = LogDensity(data.pi_chart, sigma)
        except ValueError as exc:
            raise DefinitionError(str(exc), path, lineno, "density") from None

    connections = {}
    morphisms = {}
    for kind, name, lineno0, lines in blocks:
        if kind == "bundle":
            if not name:
                raise DefinitionError("bundle sections need a name: [bundle NAME]", path, lineno0)
            connections[name] = _bundle(name, lines, data, path)
        elif kind == "morphism":
            spec = parse_morphism_lines(name or "morphism", lines, path)
            spec.line = lineno0
            morphisms[spec.name] = spec
    return Definition(path, data, sections, density, connections, morphisms)


def _bundle(name: str, lines, data: AlgebroidData, path: str) -> Connection:
    frame = []
    gamma_lines = []
    adjoint = None
    for lineno, line in lines:
        parts = line.split()
        if parts[0] == "frame":
            if parts[1:] == ["fiber"]:
                frame.extend((f.name, f.parity) for f in data.fiber)
            elif len(parts) == 3:
                try:
                    frame.append((parts[1], parse_parity(parts[2])))
                except ValueError as exc:
                    raise DefinitionError(str(exc), path, lineno, f"bundle {name}") from None
            else:
                raise DefinitionError("expected 'frame NAME PARITY' or 'frame fiber'", path, lineno, f"bundle {name}")
        elif parts[0] == "gamma":
            gamma_lines.append((lineno, line[len("gamma"):].strip()))
        elif parts[0] == "adjoint":
            try:
                adjoint = Fraction(parts[1]) if len(parts) > 1 else Fraction(1)
            except ValueError:
                raise DefinitionError(f"bad adjoint scale {parts[1]!r}", path, lineno, f"bundle {name}") from None
        else:
            raise DefinitionError(f"unknown bundle directive {parts[0]!r}", path, lineno, f"bundle {name}")
    try:
        bundle = BundleData(data.base_chart, frame)
    except ValueError as exc:
        raise DefinitionError(str(exc), path, None, f"bundle {name}") from None
    if adjoint is not None:
        if bundle != BundleData.of_algebroid(data):
            raise DefinitionError("'adjoint' needs 'frame fiber'", path, None, f"bundle {name}")
        base = Connection.adjoint(data, adjoint)
        gamma = dict(base.gamma)
    else:
        gamma = {}
    for lineno, text in gamma_lines:
        m = _ARROW.match(text)
        if not m:
            raise DefinitionError("expected 'gamma a e -> f = expr'", path, lineno, f"bundle {name}")
        al, i, j, rhs = m.groups()
        if al not in data.fiber_names:
            raise DefinitionError(f"undeclared fiber basis element {al!r}", path, lineno, f"bundle {name}")
        if i not in bundle.names or j not in bundle.names:
            raise DefinitionError(f"undeclared frame element in {text!r}", path, lineno, f"bundle {name}")
        val = _expr(rhs.strip(), data.base_chart, path, lineno, f"bundle {name}")
        gamma[(j, al, i)] = gamma.get((j, al, i), data.base_chart.zero()) + val
    try:
        return Connection(data, bundle, gamma)
    except ValueError as exc:
        raise DefinitionError(str(exc), path, None, f"bundle {name}") from None


def parse_morphism_lines(name: str, lines, path: str) -> MorphismSpec:
    spec = MorphismSpec(name)
    for lineno, line in lines:
        parts = line.split(None, 1)
        key = parts[0]
        if key in ("target", "source_q", "target_q"):
            _, eq, rhs = line.partition("=")
            if not eq:
                raise DefinitionError(f"expected '{key} = value'", path, lineno, f"morphism {name}")
            setattr(spec, key, rhs.strip())
        elif key == "base":
            lhs, eq, rhs = parts[1].partition("=") if len(parts) > 1 else ("", "", "")
            if not eq:
                raise DefinitionError("expected 'base y = expr'", path, lineno, f"morphism {name}")
            spec.base[lhs.strip()] = (rhs.strip(), lineno)
        elif key == "fiber":
            m = re.match(r"(\S+)\s*->\s*(\S+)\s*=\s*(.+)\Z", parts[1] if len(parts) > 1 else "")
            if not m:
                raise DefinitionError("expected 'fiber a -> m = expr'", path, lineno, f"morphism {name}")
            spec.fiber[(m.group(1), m.group(2))] = (m.group(3).strip(), lineno)
        else:
            raise DefinitionError(f"unknown morphism directive {key!r}", path, lineno, f"morphism {name}")
    return spec


def build_morphism(spec: MorphismSpec, source: Definition, target: Definition, path: str | None = None) -> BundleMorphism:
    path = path or source.path
    chart = source.data.base_chart
    base = {}
    for y, (text, lineno) in spec.base.items():
        if y not in target.data.base_chart:
            raise DefinitionError(f"{y!r} is not a target base coordinate", path, lineno, f"morphism {spec.name}")
        base[y] = _expr(text, chart, path, lineno, f"morphism {spec.name}")
    missing = [y for y in target.data.base_chart.names if y not in base]
    if missing:
        # identity on coordinates shared by name is the natural default
        for y in missing:
            if y in chart and chart.parity(y) == target.data.base_chart.parity(y):
                base[y] = chart.gen(y)
            else:
                raise DefinitionError(f"no base image for target coordinate {y!r}", path, spec.line, f"morphism {spec.name}")
    fiber = {}
    for (a, m), (text, lineno) in spec.fiber.items():
        if a not in source.data.fiber_names or m not in target.data.fiber_names:
            raise DefinitionError(f"unknown basis elements in fiber map {a} -> {m}", path, lineno, f"morphism {spec.name}")
        fiber[(a, m)] = _expr(text, chart, path, lineno, f"morphism {spec.name}")
    try:
        return BundleMorphism(source.data, target.data, base, fiber)
    except ValueError as exc:
        raise DefinitionError(str(exc), path, spec.line, f"morphism {spec.name}") from None


def load(path: str | Path) -> Definition:
    p = resolve_path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise DefinitionError(f"cannot read file: {exc}", str(path)) from None
    return loads(text, str(p))


def load_morphism_file(path: str | Path) -> MorphismSpec:
    p = resolve_path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise DefinitionError(f"cannot read file: {exc}", str(path)) from None
    blocks = _blocks(text, str(p))
    specs = [b for b in blocks if b[0] == "morphism"]
    if len(specs) != 1 or len(blocks) != 1:
        raise DefinitionError("a map file must contain exactly one [morphism] block", str(p))
    _, name, lineno, lines = specs[0]
    spec = parse_morphism_lines(name or p.stem, lines, str(p))
    spec.line = lineno
    return spec


def load_fixture(name: str) -> Definition:
    return load(FIXTURE_DIR / (name if name.endswith(".qla") else f"{name}.qla"))
