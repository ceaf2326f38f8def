"""Homogeneous super vector fields acting as derivations on a chart."""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from qla.gpoly import EVEN, ODD, ChartMismatch, GradedPoly, SuperChart, check_parity, parity_name


class VectorField:
    """``X = sum_a X^a d/dx^a`` of definite Grassmann parity.

    Each component ``X^a`` must be zero or of parity ``parity(X) + parity(x^a)``.
    Zero components are not stored.
    """

    __slots__ = ("chart", "parity", "_comps")

    def __init__(self, chart: SuperChart, parity: int, components: Mapping[str, GradedPoly] | None = None):
        self.chart = chart
        self.parity = parity % 2
        comps = {}
        for name, comp in (components or {}).items():
            if name not in chart:
                raise KeyError(f"unknown coordinate {name!r}")
            if comp.chart != chart:
                raise ChartMismatch(f"component {name!r} is not over the field's chart")
            check_parity(comp, self.parity + chart.parity(name), f"component along {name!r}")
            if comp:
                comps[name] = comp
        self._comps = comps

    @classmethod
    def zero(cls, chart: SuperChart, parity: int = ODD) -> "VectorField":
        return cls(chart, parity, {})

    @classmethod
    def partial(cls, chart: SuperChart, name: str) -> "VectorField":
        return cls(chart, chart.parity(name), {name: chart.one()})

    def component(self, name: str) -> GradedPoly:
        if name not in self.chart:
            raise KeyError(f"unknown coordinate {name!r}")
        return self._comps.get(name, self.chart.zero())

    __getitem__ = component

    @property
    def components(self) -> dict[str, GradedPoly]:
        return dict(self._comps)

    def is_zero(self) -> bool:
        return not self._comps

    def __eq__(self, other) -> bool:
        if not isinstance(other, VectorField):
            return NotImplemented
        if self.chart != other.chart or self._comps != other._comps:
            return False
        return self.parity == other.parity or not self._comps

    def __hash__(self):
        return hash((self.chart, frozenset(self._comps.items())))

    def __call__(self, f: GradedPoly) -> GradedPoly:
        return apply(self, f)

    def _same(self, other: "VectorField") -> None:
        if not isinstance(other, VectorField):
            raise TypeError("expected a VectorField")
        if other.chart != self.chart:
            raise ChartMismatch("vector fields live over different charts")

    def __add__(self, other: "VectorField") -> "VectorField":
        self._same(other)
        if self.parity != other.parity and self._comps and other._comps:
            raise ValueError("sum of vector fields of different parity is not homogeneous")
        parity = self.parity if self._comps else other.parity
        out = dict(self._comps)
        for n, c in other._comps.items():
            out[n] = out[n] + c if n in out else c
        return VectorField(self.chart, parity, out)

    def __neg__(self) -> "VectorField":
        return VectorField(self.chart, self.parity, {n: -c for n, c in self._comps.items()})

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + (-other)

    def __rmul__(self, f) -> "VectorField":
        """Left multiplication by a function or scalar: (f X)^a = f X^a."""
        if isinstance(f, (int, Fraction)):
            return VectorField(self.chart, self.parity, {n: c.scale(f) for n, c in self._comps.items()})
        if isinstance(f, GradedPoly):
            p = f.homogeneous_parity()
            if p is None:
                return VectorField.zero(self.chart, self.parity)
            return VectorField(self.chart, self.parity + p, {n: f * c for n, c in self._comps.items()})
        return NotImplemented

    def scale(self, c) -> "VectorField":
        return Fraction(c) * self

    def weight(self):
        return field_weight(self)

    def __str__(self) -> str:
        if not self._comps:
            return "0"
        parts = []
        for name in self.chart.names:
            if name in self._comps:
                parts.append(f"({self._comps[name]})*d/d{name}")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"VectorField[{parity_name(self.parity)}]({self})"


def apply(X: VectorField, f: GradedPoly) -> GradedPoly:
    """X(f) = sum_a X^a * (left) d f / d x^a."""
    if f.chart != X.chart:
        raise ChartMismatch("vector field and function live over different charts")
    out = X.chart.zero()
    for name, comp in X._comps.items():
        d = f.diff(name)
        if d:
            out = out + comp * d
    return out


def _require_homogeneous(X: VectorField) -> int:
    if not isinstance(X, VectorField):
        raise TypeError("expected a VectorField")
    return X.parity


def commutator(X: VectorField, Y: VectorField) -> VectorField:
    """Graded commutator with components X(Y^a) - (-1)^(|X||Y|) Y(X^a)."""
    if X.chart != Y.chart:
        raise ChartMismatch("vector fields live over different charts")
    px, py = _require_homogeneous(X), _require_homogeneous(Y)
    sgn = -1 if (px and py) else 1
    out = {}
    for name in X.chart.names:
        c = apply(X, Y.component(name))
        d = apply(Y, X.component(name))
        comp = c - d if sgn == 1 else c + d
        if comp:
            out[name] = comp
    return VectorField(X.chart, px + py, out)


def is_homological(X: VectorField) -> bool:
    return X.parity == ODD and commutator(X, X).is_zero()


def field_weight(X: VectorField):
    """Weight w with weight(X^a) = w + weight(x^a) for all a.

    Returns ``'zero'`` for the zero field and ``'inhomogeneous'`` otherwise.
    """
    ws = set()
    for name, comp in X._comps.items():
        w = comp.weight()
        if w == "inhomogeneous":
            return "inhomogeneous"
        ws.add(w - X.chart.weight(name))
    if not ws:
        return "zero"
    if len(ws) > 1:
        return "inhomogeneous"
    return ws.pop()


def restrict(X: VectorField, chart: SuperChart) -> VectorField:
    """View a field whose components and directions only involve ``chart`` over it."""
    out = {}
    for name, comp in X._comps.items():
        if name not in chart:
            raise ValueError(f"field has a component along {name!r}, not in target chart")
        out[name] = comp.recast(chart)
    return VectorField(chart, X.parity, out)


def extend(X: VectorField, chart: SuperChart) -> VectorField:
    """Push a field on a sub-chart to a larger chart (components independent of new coordinates)."""
    return VectorField(chart, X.parity, {n: c.recast(chart) for n, c in X._comps.items()})


__all__ = [
    "EVEN",
    "ODD",
    "VectorField",
    "apply",
    "commutator",
    "extend",
    "field_weight",
    "is_homological",
    "restrict",
]
