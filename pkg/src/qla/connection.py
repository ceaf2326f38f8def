"""A-valued connections on a vector bundle from local Christoffel data.

``nabla_{t_alpha} e_i = Gamma^j_{alpha i} e_j``; the extension to arbitrary
sections is forced by function-linearity in ``u`` and the graded Leibniz rule
in ``s``:

    (nabla_u s)^j = rho(u) s^j + (-1)^(|alpha|(|s|+|i|)) u^alpha s^i Gamma^j_{alpha i}
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from qla.algebroid import AlgebroidData, FiberElement, Section, _rho_apply, bracket
from qla.gpoly import GradedPoly, SuperChart, check_parity, parity_name, parse_parity, sign


@dataclass(frozen=True)
class BundleData:
    base_chart: SuperChart
    frame: tuple[tuple[str, int], ...]

    def __init__(self, base_chart: SuperChart, frame: Iterable):
        fr = []
        for item in frame:
            if isinstance(item, FiberElement):
                item = (item.name, item.parity)
            name, par = item
            fr.append((name, parse_parity(par)))
        names = [n for n, _ in fr]
        if len(set(names)) != len(names):
            raise ValueError("frame names must be unique")
        object.__setattr__(self, "base_chart", base_chart)
        object.__setattr__(self, "frame", tuple(fr))

    @classmethod
    def of_algebroid(cls, data: AlgebroidData) -> "BundleData":
        """The algebroid itself as a vector bundle (for connections on A)."""
        return cls(data.base_chart, data.fiber)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.frame)

    def parity(self, name: str) -> int:
        for n, p in self.frame:
            if n == name:
                return p
        raise KeyError(f"unknown frame element {name!r}")

    def section(self, parity, components: Mapping[str, GradedPoly | str]) -> "BundleSection":
        comps = {}
        for i, v in components.items():
            comps[i] = self.base_chart.parse(v) if isinstance(v, str) else v
        return BundleSection(self, parse_parity(parity), comps)

    def basis(self, name: str) -> "BundleSection":
        return BundleSection(self, self.parity(name), {name: self.base_chart.one()})


class BundleSection:
    """``s = s^i(x) e_i`` of definite parity."""

    __slots__ = ("bundle", "parity", "_comps")

    def __init__(self, bundle: BundleData, parity: int, components: Mapping[str, GradedPoly] | None = None):
        self.bundle = bundle
        self.parity = parity % 2
        comps = {}
        for i, val in (components or {}).items():
            p = bundle.parity(i)
            if val.chart != bundle.base_chart:
                raise ValueError(f"component {i!r} is not over the base chart")
            check_parity(val, self.parity + p, f"bundle section component along {i!r}")
            if val:
                comps[i] = val
        self._comps = comps

    def component(self, i: str) -> GradedPoly:
        self.bundle.parity(i)
        return self._comps.get(i, self.bundle.base_chart.zero())

    __getitem__ = component

    @property
    def components(self) -> dict[str, GradedPoly]:
        return dict(self._comps)

    def is_zero(self) -> bool:
        return not self._comps

    def __eq__(self, other) -> bool:
        if not isinstance(other, BundleSection):
            return NotImplemented
        return (
            self.bundle == other.bundle
            and self._comps == other._comps
            and (self.parity == other.parity or not self._comps)
        )

    def __hash__(self):
        return hash(frozenset(self._comps.items()))

    def __add__(self, other: "BundleSection") -> "BundleSection":
        if other.bundle != self.bundle:
            raise ValueError("sections of different bundles")
        if self._comps and other._comps and self.parity != other.parity:
            raise ValueError("sum of sections of different parity is not homogeneous")
        parity = self.parity if self._comps else other.parity
        out = dict(self._comps)
        for i, v in other._comps.items():
            out[i] = out[i] + v if i in out else v
        return BundleSection(self.bundle, parity, out)

    def __neg__(self) -> "BundleSection":
        return BundleSection(self.bundle, self.parity, {i: -v for i, v in self._comps.items()})

    def __sub__(self, other: "BundleSection") -> "BundleSection":
        return self + (-other)

    def __rmul__(self, f) -> "BundleSection":
        if isinstance(f, (int, Fraction)):
            return BundleSection(self.bundle, self.parity, {i: v.scale(f) for i, v in self._comps.items()})
        if isinstance(f, GradedPoly):
            p = f.homogeneous_parity()
            if p is None:
                return BundleSection(self.bundle, self.parity, {})
            return BundleSection(self.bundle, self.parity + p, {i: f * v for i, v in self._comps.items()})
        return NotImplemented

    def __str__(self) -> str:
        if not self._comps:
            return "0"
        return " + ".join(f"({self._comps[i]})*{i}" for i in self.bundle.names if i in self._comps)

    def __repr__(self) -> str:
        return f"BundleSection[{parity_name(self.parity)}]({self})"


def as_bundle_section(u: Section, bundle: BundleData | None = None) -> BundleSection:
    bundle = bundle or BundleData.of_algebroid(u.algebroid)
    return BundleSection(bundle, u.parity, u.components)


def as_section(s: BundleSection, data: AlgebroidData) -> Section:
    return Section(data, s.parity, s.components)


class Connection:
    """Christoffel data ``gamma[(alpha, i)][j] = Gamma^j_{alpha i}``."""

    def __init__(self, algebroid: AlgebroidData, bundle: BundleData, gamma: Mapping[tuple[str, str, str], GradedPoly] | None = None):
        if bundle.base_chart != algebroid.base_chart:
            raise ValueError("bundle and algebroid live over different base charts")
        self.algebroid = algebroid
        self.bundle = bundle
        self.gamma: dict[tuple[str, str, str], GradedPoly] = {}
        for (j, al, i), val in (gamma or {}).items():
            algebroid._check_index(al)
            pj, pi = bundle.parity(j), bundle.parity(i)
            if val.chart != bundle.base_chart:
                raise ValueError(f"Gamma^{j}_{al}{i} is not over the base chart")
            check_parity(val, algebroid.parity(al) + pi + pj, f"Gamma^{j}_({al},{i})")
            if val:
                self.gamma[(j, al, i)] = val

    @classmethod
    def from_table(cls, algebroid, bundle, table: Mapping[tuple[str, str], Mapping[str, GradedPoly]]) -> "Connection":
        """``table[(alpha, i)] = {j: Gamma^j_{alpha i}}``, i.e. nabla_{t_alpha} e_i."""
        gamma = {}
        for (al, i), row in table.items():
            for j, val in row.items():
                gamma[(j, al, i)] = val
        return cls(algebroid, bundle, gamma)

    @classmethod
    def adjoint(cls, data: AlgebroidData, scale=1) -> "Connection":
        """nabla_{t_a} t_b = scale * [t_a, t_b] on E = A."""
        gamma = {}
        for (g, al, be), val in data.structure_data.items():
            gamma[(g, al, be)] = val.scale(Fraction(scale) * sign(data.parity(be)))
        return cls(data, BundleData.of_algebroid(data), gamma)


def nabla(c: Connection, u: Section, s: BundleSection) -> BundleSection:
    data = c.algebroid
    if u.algebroid is not data and u.algebroid != data:
        raise ValueError("section does not belong to the connection's algebroid")
    if s.bundle != c.bundle:
        raise ValueError("bundle section does not belong to the connection's bundle")
    comps = {j: _rho_apply(u, s.component(j)) for j in c.bundle.names}
    for (j, al, i), val in c.gamma.items():
        ua = u._comps.get(al)
        si = s._comps.get(i)
        if ua is None or si is None:
            continue
        term = ua * si * val
        if data.parity(al) * (s.parity + c.bundle.parity(i)) % 2:
            term = -term
        comps[j] = comps[j] + term
    return BundleSection(c.bundle, u.parity + s.parity, {j: v for j, v in comps.items() if v})


def curvature(c: Connection, u: Section, v: Section, s: BundleSection) -> BundleSection:
    """R(u,v)s = nabla_u nabla_v s - (-1)^(|u||v|) nabla_v nabla_u s - nabla_[u,v] s."""
    a = nabla(c, u, nabla(c, v, s))
    b = nabla(c, v, nabla(c, u, s))
    w = nabla(c, bracket(u, v), s)
    return (a + b if u.parity and v.parity else a - b) - w


def _require_on_A(c: Connection) -> None:
    if c.bundle != BundleData.of_algebroid(c.algebroid):
        raise ValueError("torsion needs a connection on the algebroid itself (E = A)")


def torsion(c: Connection, u: Section, v: Section) -> Section:
    """T(u,v) = nabla_u v - (-1)^(|u||v|) nabla_v u - [u,v]."""
    _require_on_A(c)
    data = c.algebroid
    a = as_section(nabla(c, u, as_bundle_section(v, c.bundle)), data)
    b = as_section(nabla(c, v, as_bundle_section(u, c.bundle)), data)
    return (a + b if u.parity and v.parity else a - b) - bracket(u, v)


def nabla_q(W, c: Connection, s: BundleSection) -> BundleSection:
    """The odd endomorphism nabla_q of Sec(E)."""
    return nabla(c, W.q, s)


def is_flat(c: Connection) -> bool:
    """R vanishes on all basis triples (sufficient by tensoriality)."""
    data = c.algebroid
    for a in data.fiber_names:
        for b in data.fiber_names:
            for i in c.bundle.names:
                if not curvature(c, data.basis(a), data.basis(b), c.bundle.basis(i)).is_zero():
                    return False
    return True


def is_torsion_free(c: Connection) -> bool:
    _require_on_A(c)
    data = c.algebroid
    for a in data.fiber_names:
        for b in data.fiber_names:
            if not torsion(c, data.basis(a), data.basis(b)).is_zero():
                return False
    return True
