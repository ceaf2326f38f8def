"""Lie superalgebroids in a local chart and a local basis of sections.

The data is the anchor ``rho(t_alpha) = Q^a_alpha(x) d/dx^a`` and the structure
functions ``Q^gamma_{alpha beta}(x)`` with ``[t_alpha, t_beta] = (-1)^|beta| Q^gamma_{alpha beta} t_gamma``.
On the parity-shifted bundle with coordinates ``(x^a, xi^alpha)`` this is the
weight one vector field

    Q = xi^alpha Q^a_alpha d/dx^a + 1/2 xi^alpha xi^beta Q^gamma_{beta alpha} d/dxi^gamma.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from qla.gpoly import (
    EVEN,
    ODD,
    Coord,
    GradedPoly,
    SuperChart,
    check_parity,
    parity_name,
    parse_parity,
    sign,
    substitute,
)
from qla.report import Report
from qla.schart import VectorField, commutator


class StructureError(ValueError):
    """Algebroid data violating a parity or graded-symmetry requirement."""


@dataclass(frozen=True)
class FiberElement:
    """Local basis section ``t_alpha`` and the name of its coordinate on the shifted bundle."""

    name: str
    parity: int
    coord: str = ""

    def __post_init__(self):
        object.__setattr__(self, "parity", parse_parity(self.parity))
        if not self.coord:
            object.__setattr__(self, "coord", f"xi_{self.name}")


def _fiber_list(fiber: Iterable) -> tuple[FiberElement, ...]:
    out = []
    for f in fiber:
        if not isinstance(f, FiberElement):
            f = FiberElement(*f)
        out.append(f)
    names = [f.name for f in out]
    dup = {n for n in names if names.count(n) > 1}
    if dup:
        raise StructureError(f"duplicate fiber basis names {sorted(dup)}")
    return tuple(out)


def symmetry_sign(pa: int, pb: int) -> int:
    """Sign relating Q^g_{ab} and Q^g_{ba}: (-1)^((|a|+1)(|b|+1))."""
    return sign((pa + 1) * (pb + 1))


def complete_structure(fiber: Sequence[FiberElement], structure: Mapping) -> dict:
    """Fill in ``Q^g_{ba}`` from ``Q^g_{ab}`` where only one ordering was given.

    Keys are ``(gamma, alpha, beta)``. Entries given for both orderings are left
    untouched so that inconsistent input is still caught by validation.
    """
    par = {f.name: f.parity for f in fiber}
    out = dict(structure)
    for (g, a, b), val in structure.items():
        if (g, b, a) not in structure:
            out[(g, b, a)] = val.scale(symmetry_sign(par[a], par[b]))
    return out


class AlgebroidData:
    """Anchor and structure functions of a Lie superalgebroid over one chart.

    ``anchor`` maps ``(alpha, a)`` to ``Q^a_alpha`` and ``structure`` maps
    ``(gamma, alpha, beta)`` to ``Q^gamma_{alpha beta}``; missing keys are zero.
    """

    def __init__(
        self,
        base_chart: SuperChart,
        fiber: Iterable,
        anchor: Mapping[tuple[str, str], GradedPoly] | None = None,
        structure: Mapping[tuple[str, str, str], GradedPoly] | None = None,
    ):
        self.base_chart = base_chart
        self.fiber = _fiber_list(fiber)
        self._par = {f.name: f.parity for f in self.fiber}
        clash = [f.coord for f in self.fiber if f.coord in base_chart]
        if clash:
            raise StructureError(f"fiber coordinate names {clash} collide with base coordinates")
        coords = [f.coord for f in self.fiber]
        if len(set(coords)) != len(coords):
            raise StructureError("fiber coordinate names must be distinct")

        self.anchor_data: dict[tuple[str, str], GradedPoly] = {}
        for (al, a), val in (anchor or {}).items():
            self._check_index(al)
            if a not in base_chart:
                raise StructureError(f"anchor component along unknown base coordinate {a!r}")
            self._check_chart(val, f"Q^{a}_{al}")
            try:
                check_parity(val, self._par[al] + base_chart.parity(a), f"anchor component Q^{a}_{al}")
            except ValueError as exc:
                raise StructureError(str(exc)) from None
            if val:
                self.anchor_data[(al, a)] = val

        self.structure_data: dict[tuple[str, str, str], GradedPoly] = {}
        for (g, al, be), val in (structure or {}).items():
            for idx in (g, al, be):
                self._check_index(idx)
            self._check_chart(val, f"Q^{g}_{al}{be}")
            try:
                check_parity(
                    val,
                    self._par[g] + self._par[al] + self._par[be],
                    f"structure function Q^{g}_({al},{be})",
                )
            except ValueError as exc:
                raise StructureError(str(exc)) from None
            if val:
                self.structure_data[(g, al, be)] = val

        bad = self.symmetry_violations()
        if bad:
            g, al, be = bad[0]
            raise StructureError(
                "graded symmetry Q^g_(a,b) = (-1)^((|a|+1)(|b|+1)) Q^g_(b,a) violated at "
                + ", ".join(f"(gamma={g}, alpha={a}, beta={b})" for g, a, b in bad)
            )

    def _check_index(self, name: str) -> None:
        if name not in self._par:
            raise StructureError(f"unknown fiber basis element {name!r}")

    def _check_chart(self, val: GradedPoly, what: str) -> None:
        if val.chart != self.base_chart:
            raise StructureError(f"{what} is not a function on the base chart")

    @classmethod
    def from_brackets(cls, base_chart, fiber, anchor=None, brackets=None) -> "AlgebroidData":
        """Build from basis brackets ``[t_alpha, t_beta] = sum_gamma c^gamma t_gamma``.

        ``brackets`` maps ``(alpha, beta)`` to ``{gamma: c}``. Pairs given in only one
        order are completed by graded antisymmetry.
        """
        fib = _fiber_list(fiber)
        par = {f.name: f.parity for f in fib}
        structure = {}
        for (al, be), coeffs in (brackets or {}).items():
            if al not in par or be not in par:
                raise StructureError(f"bracket of unknown basis elements ({al}, {be})")
            for g, c in coeffs.items():
                structure[(g, al, be)] = c.scale(sign(par[be]))
        return cls(base_chart, fib, anchor, complete_structure(fib, structure))

    # accessors
    @property
    def fiber_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.fiber)

    def parity(self, alpha: str) -> int:
        return self._par[alpha]

    def coord_of(self, alpha: str) -> str:
        for f in self.fiber:
            if f.name == alpha:
                return f.coord
        raise KeyError(alpha)

    def rho(self, alpha: str, a: str) -> GradedPoly:
        """Anchor component Q^a_alpha."""
        return self.anchor_data.get((alpha, a), self.base_chart.zero())

    def Q(self, gamma: str, alpha: str, beta: str) -> GradedPoly:
        """Structure function Q^gamma_{alpha beta}."""
        return self.structure_data.get((gamma, alpha, beta), self.base_chart.zero())

    def symmetry_violations(self) -> list[tuple[str, str, str]]:
        bad = []
        names = self.fiber_names
        for g in names:
            for i, al in enumerate(names):
                for be in names[i:]:
                    lhs = self.Q(g, al, be)
                    rhs = self.Q(g, be, al).scale(symmetry_sign(self._par[al], self._par[be]))
                    if lhs != rhs:
                        bad.append((g, al, be))
        return bad

    def __eq__(self, other) -> bool:
        if not isinstance(other, AlgebroidData):
            return NotImplemented
        return (
            self.base_chart == other.base_chart
            and self.fiber == other.fiber
            and self.anchor_data == other.anchor_data
            and self.structure_data == other.structure_data
        )

    def __hash__(self):
        return id(self)

    def basis(self, alpha: str) -> "Section":
        self._check_index(alpha)
        return Section(self, self._par[alpha], {alpha: self.base_chart.one()})

    def section(self, parity, components: Mapping[str, GradedPoly | str]) -> "Section":
        comps = {}
        for al, val in components.items():
            if isinstance(val, str):
                val = self.base_chart.parse(val)
            comps[al] = val
        return Section(self, parse_parity(parity), comps)

    def zero_section(self, parity: int = ODD) -> "Section":
        return Section(self, parity, {})

    @cached_property
    def pi_chart(self) -> SuperChart:
        return pi_chart(self)

    def lift(self, f: GradedPoly) -> GradedPoly:
        """A base function viewed on the shifted bundle."""
        if f.chart != self.base_chart:
            raise ValueError("function is not over the base chart")
        pad = (0,) * (len(self.pi_chart.even_names) - len(self.base_chart.even_names))
        return GradedPoly(self.pi_chart, {(e + pad, o): c for (e, o), c in f.items()})

    def drop(self, f: GradedPoly) -> GradedPoly:
        """Inverse of :meth:`lift`; fails if ``f`` depends on fiber coordinates."""
        ne = len(self.base_chart.even_names)
        no = len(self.base_chart.odd_names)
        out = {}
        for (e, o), c in f.items():
            if any(e[ne:]) or any(i >= no for i in o):
                raise ValueError(f"{f} depends on fiber coordinates")
            out[(e[:ne], o)] = c
        return GradedPoly(self.base_chart, out)

    @cached_property
    def Q_field(self) -> VectorField:
        return build_Q(self)

    def __repr__(self) -> str:
        fib = ", ".join(f"{f.name}:{parity_name(f.parity)}" for f in self.fiber)
        return f"AlgebroidData(base={self.base_chart!r}, fiber=[{fib}])"


class Section:
    """``u = u^alpha(x) t_alpha`` of definite parity.

    Each component is zero or of parity ``parity(u) + parity(t_alpha)``.
    """

    __slots__ = ("algebroid", "parity", "_comps")

    def __init__(self, algebroid: AlgebroidData, parity: int, components: Mapping[str, GradedPoly] | None = None):
        self.algebroid = algebroid
        self.parity = parity % 2
        comps = {}
        for al, val in (components or {}).items():
            algebroid._check_index(al)
            if val.chart != algebroid.base_chart:
                raise ValueError(f"component {al!r} is not a function on the base chart")
            check_parity(val, self.parity + algebroid.parity(al), f"section component along {al!r}")
            if val:
                comps[al] = val
        self._comps = comps

    def component(self, alpha: str) -> GradedPoly:
        self.algebroid._check_index(alpha)
        return self._comps.get(alpha, self.algebroid.base_chart.zero())

    __getitem__ = component

    @property
    def components(self) -> dict[str, GradedPoly]:
        return dict(self._comps)

    def is_zero(self) -> bool:
        return not self._comps

    def __eq__(self, other) -> bool:
        if not isinstance(other, Section):
            return NotImplemented
        if self.algebroid is not other.algebroid and self.algebroid != other.algebroid:
            return False
        if self._comps != other._comps:
            return False
        return self.parity == other.parity or not self._comps

    def __hash__(self):
        return hash(frozenset(self._comps.items()))

    def _same(self, other: "Section") -> None:
        if not isinstance(other, Section):
            raise TypeError("expected a Section")
        if other.algebroid is not self.algebroid and other.algebroid != self.algebroid:
            raise ValueError("sections of different algebroids")

    def __add__(self, other: "Section") -> "Section":
        self._same(other)
        if self._comps and other._comps and self.parity != other.parity:
            raise ValueError("sum of sections of different parity is not homogeneous")
        parity = self.parity if self._comps else other.parity
        out = dict(self._comps)
        for al, v in other._comps.items():
            out[al] = out[al] + v if al in out else v
        return Section(self.algebroid, parity, out)

    def __neg__(self) -> "Section":
        return Section(self.algebroid, self.parity, {a: -v for a, v in self._comps.items()})

    def __sub__(self, other: "Section") -> "Section":
        return self + (-other)

    def __rmul__(self, f) -> "Section":
        """Left module action (f u)^alpha = f u^alpha."""
        if isinstance(f, (int, Fraction)):
            return Section(self.algebroid, self.parity, {a: v.scale(f) for a, v in self._comps.items()})
        if isinstance(f, GradedPoly):
            p = f.homogeneous_parity()
            if p is None:
                return Section(self.algebroid, self.parity, {})
            return Section(self.algebroid, self.parity + p, {a: f * v for a, v in self._comps.items()})
        return NotImplemented

    def scale(self, c) -> "Section":
        return Fraction(c) * self

    def __str__(self) -> str:
        if not self._comps:
            return "0"
        return " + ".join(
            f"({self._comps[a]})*{a}" for a in self.algebroid.fiber_names if a in self._comps
        )

    def __repr__(self) -> str:
        return f"Section[{parity_name(self.parity)}]({self})"


# ---------------------------------------------------------------------------
# constructions


def pi_chart(data: AlgebroidData) -> SuperChart:
    """Base coordinates (weight 0) followed by shifted fiber coordinates (weight 1)."""
    coords = [Coord(c.name, c.parity, 0) for c in data.base_chart]
    coords += [Coord(f.coord, (f.parity + 1) % 2, 1) for f in data.fiber]
    return SuperChart(coords)


def build_Q(data: AlgebroidData) -> VectorField:
    chart = data.pi_chart
    xi = {f.name: chart.gen(f.coord) for f in data.fiber}
    comps: dict[str, GradedPoly] = {}
    for (al, a), val in data.anchor_data.items():
        term = xi[al] * data.lift(val)
        comps[a] = comps[a] + term if a in comps else term
    half = Fraction(1, 2)
    for (g, be, al), val in data.structure_data.items():
        # 1/2 xi^alpha xi^beta Q^gamma_{beta alpha}
        term = (xi[al] * xi[be] * data.lift(val)).scale(half)
        cg = data.coord_of(g)
        comps[cg] = comps[cg] + term if cg in comps else term
    return VectorField(chart, ODD, comps)


def verify(data: AlgebroidData, mode: str = "lie") -> Report:
    """Certify the homological condition.

    ``lie``: ``[Q, Q] = 0`` identically. ``almost``: only ``[Q, Q] x^a = 0`` for the
    base coordinates, i.e. the anchor is a bracket homomorphism but Jacobi may fail.
    """
    if mode not in ("lie", "almost"):
        raise ValueError(f"unknown verification mode {mode!r}")
    Q = data.Q_field
    Q2 = commutator(Q, Q)
    report = Report(f"verify[{mode}]")
    if mode == "lie":
        coords = data.pi_chart.names
    else:
        coords = data.base_chart.names
    for name in coords:
        comp = Q2.component(name)
        report.add("[Q,Q] = 0", comp.is_zero(), comp, f"component d/d{name}")
    if not report.results:
        report.add("[Q,Q] = 0", True, "0", "no coordinates")
    return report


def _check_same(u: Section, v: Section) -> AlgebroidData:
    if not isinstance(u, Section) or not isinstance(v, Section):
        raise TypeError("expected sections")
    if u.algebroid is not v.algebroid and u.algebroid != v.algebroid:
        raise ValueError("sections of different algebroids")
    return u.algebroid


def _rho_apply(u: Section, f: GradedPoly) -> GradedPoly:
    """rho(u) f = u^alpha Q^a_alpha d_a f."""
    data = u.algebroid
    out = data.base_chart.zero()
    for (al, a), val in data.anchor_data.items():
        ua = u._comps.get(al)
        if ua is None:
            continue
        d = f.diff(a)
        if d:
            out = out + ua * val * d
    return out


def bracket(u: Section, v: Section) -> Section:
    """Lie algebroid bracket in components:

    [u,v]^g = u^a Q^x_a d_x v^g - (-1)^(|u||v|) v^a Q^x_a d_x u^g
              - (-1)^(|a|(|v|+1)) u^a v^b Q^g_{b a}
    """
    data = _check_same(u, v)
    pu, pv = u.parity, v.parity
    zero = data.base_chart.zero()
    out = {}
    for g in data.fiber_names:
        acc = _rho_apply(u, v.component(g))
        t = _rho_apply(v, u.component(g))
        acc = acc - t if not (pu and pv) else acc + t
        out[g] = acc
    for (g, be, al), val in data.structure_data.items():
        ua = u._comps.get(al)
        vb = v._comps.get(be)
        if ua is None or vb is None:
            continue
        term = ua * vb * val
        if data.parity(al) * (pv + 1) % 2:
            out[g] = out[g] + term
        else:
            out[g] = out[g] - term
    return Section(data, pu + pv, {g: c for g, c in out.items() if c != zero})


def anchor(u: Section) -> VectorField:
    data = u.algebroid
    comps: dict[str, GradedPoly] = {}
    for (al, a), val in data.anchor_data.items():
        ua = u._comps.get(al)
        if ua is None:
            continue
        term = ua * val
        comps[a] = comps[a] + term if a in comps else term
    return VectorField(data.base_chart, u.parity, comps)


def iota(u: Section) -> VectorField:
    """Odd isomorphism onto weight -1 fields: iota_u = (-1)^|u| u^alpha d/dxi^alpha."""
    data = u.algebroid
    s = sign(u.parity)
    comps = {data.coord_of(al): data.lift(val).scale(s) for al, val in u._comps.items()}
    return VectorField(data.pi_chart, u.parity + 1, comps)


def lie_derivative(u: Section) -> VectorField:
    """L_u = [Q, iota_u]."""
    return commutator(u.algebroid.Q_field, iota(u))


def homological_residual(q: Section) -> Section:
    """Components q^a Q^x_a d_x q^g - 1/2 q^a q^b Q^g_{b a}, which equal 1/2 [q,q]."""
    if q.parity != ODD:
        raise ValueError("homological sections must be odd")
    data = q.algebroid
    out = {g: _rho_apply(q, q.component(g)) for g in data.fiber_names}
    half = Fraction(1, 2)
    for (g, be, al), val in data.structure_data.items():
        qa = q._comps.get(al)
        qb = q._comps.get(be)
        if qa is None or qb is None:
            continue
        out[g] = out[g] - (qa * qb * val).scale(half)
    return Section(data, EVEN, {g: c for g, c in out.items() if c})


def is_homological_section(q: Section) -> tuple[bool, Section]:
    r = homological_residual(q)
    return r.is_zero(), r


def susy_pair_check(q: Section, h: Section) -> bool:
    """True iff [q, q] = h for odd q and even h."""
    _check_same(q, h)
    if q.parity != ODD:
        raise ValueError("q must be odd")
    if h.parity != EVEN and not h.is_zero():
        raise ValueError("h must be even")
    return bracket(q, q) == Section(h.algebroid, EVEN, h._comps)


# ---------------------------------------------------------------------------
# special algebroids


def zero_algebroid(base_chart: SuperChart, fiber: Iterable) -> AlgebroidData:
    return AlgebroidData(base_chart, fiber)


def tangent_algebroid(chart: SuperChart, basis_prefix: str = "D", coord_prefix: str = "d") -> AlgebroidData:
    """TM with identity anchor and vanishing brackets of coordinate fields.

    The shifted coordinates are ``d<x>`` so that Q is the de Rham differential.
    """
    fiber = [FiberElement(f"{basis_prefix}{c.name}", c.parity, f"{coord_prefix}{c.name}") for c in chart]
    anchor = {(f"{basis_prefix}{c.name}", c.name): chart.one() for c in chart}
    return AlgebroidData(chart, fiber, anchor)


def vector_field_section(data: AlgebroidData, X: VectorField, basis_prefix: str = "D") -> Section:
    """A vector field on the base as a section of the tangent algebroid built by tangent_algebroid."""
    comps = {f"{basis_prefix}{n}": c for n, c in X.components.items()}
    return Section(data, X.parity, comps)


# ---------------------------------------------------------------------------
# changes of basis


class NotInvertible(ValueError):
    pass


@dataclass(frozen=True)
class BaseChange:
    """Invertible polynomial change of base coordinates.

    ``forward`` gives each new coordinate as a function of the old ones and
    ``inverse`` each old coordinate as a function of the new ones.
    """

    old_chart: SuperChart
    new_chart: SuperChart
    forward: Mapping[str, GradedPoly]
    inverse: Mapping[str, GradedPoly]

    def __post_init__(self):
        for n in self.new_chart.names:
            if self.forward[n].chart != self.old_chart:
                raise ValueError(f"forward image of {n!r} must be over the old chart")
        for n in self.old_chart.names:
            if self.inverse[n].chart != self.new_chart:
                raise ValueError(f"inverse image of {n!r} must be over the new chart")
        for n in self.old_chart.names:
            if substitute(self.inverse[n], self.forward, self.old_chart) != self.old_chart.gen(n):
                raise NotInvertible(f"base maps are not mutually inverse on {n!r}")
        for n in self.new_chart.names:
            if substitute(self.forward[n], self.inverse, self.new_chart) != self.new_chart.gen(n):
                raise NotInvertible(f"base maps are not mutually inverse on {n!r}")

    @classmethod
    def identity(cls, chart: SuperChart) -> "BaseChange":
        g = chart.gens()
        return cls(chart, chart, g, g)

    def to_new(self, f: GradedPoly) -> GradedPoly:
        return substitute(f, self.inverse, self.new_chart)


Matrix = list  # list of rows of GradedPoly


def _matmul(A: Matrix, B: Matrix) -> Matrix:
    n, m, k = len(A), len(B), len(B[0]) if B else 0
    out = []
    for i in range(n):
        row = []
        for j in range(k):
            acc = A[i][0].chart.zero() if m else None
            for l in range(m):
                if A[i][l] and B[l][j]:
                    acc = acc + A[i][l] * B[l][j]
            row.append(acc)
        out.append(row)
    return out


def invert_matrix(T: Matrix, degree_cap: int = 16) -> Matrix:
    """Inverse of a square polynomial matrix with invertible constant part.

    Uses the series ``sum_k (-T0^{-1} N)^k T0^{-1}``, which must terminate within
    ``degree_cap`` terms; otherwise the inverse is not polynomial and NotInvertible is raised.
    """
    import sympy

    n = len(T)
    if n == 0:
        return []
    chart = T[0][0].chart
    T0 = sympy.Matrix(n, n, lambda i, j: sympy.Rational(T[i][j].constant_term()))
    if T0.det() == 0:
        raise NotInvertible("constant part of the basis change is singular")
    T0inv_s = T0.inv()
    T0inv = [[chart.const(Fraction(int(T0inv_s[i, j].p), int(T0inv_s[i, j].q))) for j in range(n)] for i in range(n)]
    N = [[T[i][j] - T[i][j].constant_term() for j in range(n)] for i in range(n)]
    M = [[-x for x in row] for row in _matmul(T0inv, N)]
    term = T0inv
    total = T0inv
    for _ in range(degree_cap):
        term = _matmul(M, term)
        if all(not x for row in term for x in row):
            break
        total = [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(total, term)]
    else:
        raise NotInvertible(f"inverse is not polynomial within degree cap {degree_cap}")
    ident = [[chart.const(1 if i == j else 0) for j in range(n)] for i in range(n)]
    if _matmul(T, total) != ident or _matmul(total, T) != ident:
        raise NotInvertible("basis change inverse failed verification")
    return total


def change_basis(
    data: AlgebroidData,
    T: Mapping[tuple[str, str], GradedPoly],
    base_change: BaseChange | None = None,
    new_fiber: Iterable | None = None,
    degree_cap: int = 16,
) -> AlgebroidData:
    """Express the algebroid in the basis with fiber coordinates ``y'^a' = y^b T_b^a'``.

    ``T`` maps ``(beta, alpha_new)`` to ``T_beta^alpha_new`` over the old base chart.
    The new basis sections are ``t'_a' = (T^{-1})_a'^b t_b``; brackets and anchors
    are computed with the old data and re-expressed in new coordinates.
    """
    new_fib = _fiber_list(new_fiber) if new_fiber is not None else data.fiber
    old_names = data.fiber_names
    new_names = [f.name for f in new_fib]
    if len(new_names) != len(old_names):
        raise NotInvertible("basis change must preserve the rank")
    new_par = {f.name: f.parity for f in new_fib}
    chart = data.base_chart
    Tm = []
    for b in old_names:
        row = []
        for a in new_names:
            val = T.get((b, a), chart.zero())
            if val.chart != chart:
                raise ValueError("basis change entries must be functions on the old base")
            try:
                check_parity(val, data.parity(b) + new_par[a], f"T_{b}^{a}")
            except ValueError as exc:
                raise StructureError(str(exc)) from None
            row.append(val)
        Tm.append(row)
    S = invert_matrix(Tm, degree_cap)
    bc = base_change or BaseChange.identity(chart)
    if bc.old_chart != chart:
        raise ValueError("base change does not start at the algebroid's base chart")

    def new_basis(i: int) -> Section:
        comps = {b: S[i][j] for j, b in enumerate(old_names) if S[i][j]}
        return Section(data, new_par[new_names[i]], comps)

    def to_new_components(w: Section) -> dict[str, GradedPoly]:
        out = {}
        for k, a in enumerate(new_names):
            acc = chart.zero()
            for j, b in enumerate(old_names):
                wb = w._comps.get(b)
                if wb is not None and Tm[j][k]:
                    acc = acc + wb * Tm[j][k]
            out[a] = acc
        return out

    basis_new = [new_basis(i) for i in range(len(new_names))]
    anchor_new = {}
    for i, a in enumerate(new_names):
        for n in bc.new_chart.names:
            val = _rho_apply(basis_new[i], bc.forward[n])
            if val:
                anchor_new[(a, n)] = bc.to_new(val)
    structure_new = {}
    for i, a in enumerate(new_names):
        for j, b in enumerate(new_names):
            w = bracket(basis_new[i], basis_new[j])
            s = sign(new_par[b])
            for g, c in to_new_components(w).items():
                if c:
                    structure_new[(g, a, b)] = bc.to_new(c).scale(s)
    return AlgebroidData(bc.new_chart, new_fib, anchor_new, structure_new)


def transform_section(
    u: Section,
    new_data: AlgebroidData,
    T: Mapping[tuple[str, str], GradedPoly],
    base_change: BaseChange | None = None,
) -> Section:
    """Components of ``u`` in the basis produced by :func:`change_basis`: u'^a' = u^b T_b^a'."""
    old = u.algebroid
    chart = old.base_chart
    bc = base_change or BaseChange.identity(chart)
    comps = {}
    for a in new_data.fiber_names:
        acc = chart.zero()
        for b, ub in u._comps.items():
            t = T.get((b, a))
            if t:
                acc = acc + ub * t
        if acc:
            comps[a] = bc.to_new(acc)
    return Section(new_data, u.parity, comps)
