"""Structures generated by a homological section ``q`` of a Lie algebroid.

``delta = [q, -]`` is a differential on sections, ``(u, v) = (-1)^|u| [[q, u], v]``
is the odd Loday-Leibniz (derived) bracket, and ``L_q = [Q, iota_q]`` together
with ``Q`` makes the shifted bundle a Q-algebroid.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Sequence

import sympy

from qla.algebroid import (
    AlgebroidData,
    Section,
    anchor,
    bracket,
    homological_residual,
    lie_derivative,
    verify,
)
from qla.gpoly import ODD, GradedPoly, SuperChart
from qla.report import Report
from qla.schart import VectorField, apply, commutator, field_weight, is_homological


class NotQLA(ValueError):
    pass


class QLA:
    """A Lie algebroid with a distinguished homological section.

    Construction certifies both ``[Q, Q] = 0`` and ``[q, q] = 0``.
    """

    def __init__(self, data: AlgebroidData, q: Section, name: str = "q"):
        if q.algebroid is not data and q.algebroid != data:
            raise NotQLA("section does not belong to the algebroid")
        if q.parity != ODD:
            raise NotQLA("a homological section must be odd")
        rep = verify(data, "lie")
        if not rep.passed:
            raise NotQLA("algebroid data does not satisfy [Q,Q] = 0:\n" + rep.text())
        res = homological_residual(q)
        if not res.is_zero():
            raise NotQLA(f"section {name} is not homological; 1/2[q,q] = {res}")
        self.data = data
        self.q = q
        self.name = name

    @property
    def Q(self) -> VectorField:
        return self.data.Q_field

    @property
    def Lq(self) -> VectorField:
        if not hasattr(self, "_Lq"):
            self._Lq = lie_derivative(self.q)
        return self._Lq

    @property
    def Qq(self) -> VectorField:
        """The induced homological field rho(q) on the base."""
        return anchor(self.q)


def delta(W: QLA, u: Section) -> Section:
    return bracket(W.q, u)


def loday(W: QLA, u: Section, v: Section) -> Section:
    """Odd derived bracket (u, v) = (-1)^|u| [[q, u], v]."""
    w = bracket(bracket(W.q, u), v)
    return -w if u.parity else w


def rho_L(W: QLA, u: Section) -> VectorField:
    """Left odd anchor rho_L(u) = -[rho(u), Q_q]."""
    return -commutator(anchor(u), W.Qq)


def base_monomials(chart: SuperChart, degree_bound: int) -> list[GradedPoly]:
    """All monomials over ``chart`` of total degree at most ``degree_bound``."""
    ne, no = len(chart.even_names), len(chart.odd_names)
    out = []
    for k in range(0, min(no, degree_bound) + 1):
        for odd in combinations(range(no), k):
            rest = degree_bound - k
            for exps in _exponents(ne, rest):
                out.append(GradedPoly(chart, {(exps, odd): Fraction(1)}))
    out.sort(key=lambda m: (m.degree(), _mono_sort_key(m)))
    return out


def _mono_sort_key(m: GradedPoly):
    ((e, o),) = m.terms
    return (tuple(-x for x in e), o)


def _exponents(n: int, bound: int):
    if n == 0:
        yield ()
        return
    for first in range(bound + 1):
        for rest in _exponents(n - 1, bound - first):
            yield (first,) + rest


def is_left_central(W: QLA, u: Section) -> bool:
    """rho_L(u) = 0 and (u, t_alpha) = 0 for all basis sections.

    Sufficient by the left Leibniz rule (u, f v) = rho_L(u)f v +- f (u, v).
    """
    if not rho_L(W, u).is_zero():
        return False
    return all(loday(W, u, W.data.basis(a)).is_zero() for a in W.data.fiber_names)


def is_right_central(W: QLA, u: Section, degree_bound: int = 3) -> bool:
    """(f t_alpha, u) = 0 for every basis section and monomial f of degree <= bound.

    Only the generating family up to the bound is certified.
    """
    data = W.data
    for f in base_monomials(data.base_chart, degree_bound):
        for a in data.fiber_names:
            if not loday(W, f * data.basis(a), u).is_zero():
                return False
    return True


def qalgebroid_check(W: QLA) -> Report:
    Q, Lq = W.Q, W.Lq
    rep = Report("Q-algebroid")
    c1 = commutator(Q, Lq)
    rep.add("[Q,L_q] = 0", c1.is_zero(), c1)
    c2 = commutator(Lq, Lq)
    rep.add("[L_q,L_q] = 0", c2.is_zero(), c2)
    wq = field_weight(Q)
    rep.add("weight(Q) = 1", wq in (1, "zero"), wq)
    wl = field_weight(Lq)
    rep.add("weight(L_q) = 0", wl in (0, "zero"), wl)
    return rep


def qhat(W: QLA) -> VectorField:
    """Q + L_q, homological but of inhomogeneous weight."""
    return W.Q + W.Lq


def bicomplex_apply(W: QLA, omega: GradedPoly, which: str) -> GradedPoly:
    if which == "Q":
        return apply(W.Q, omega)
    if which in ("Lq", "L_q"):
        return apply(W.Lq, omega)
    raise ValueError(f"unknown differential {which!r}; use 'Q' or 'Lq'")


def form_monomials(chart: SuperChart, degree_bound: int, max_weight: int | None = None) -> list[GradedPoly]:
    """Monomials over ``chart`` of total degree <= bound (and weight <= max_weight if given)."""
    out = base_monomials(chart, degree_bound)
    if max_weight is not None:
        out = [m for m in out if m.weight() <= max_weight]
    return out


def bicomplex_check(W: QLA, degree_bound: int = 3) -> Report:
    """Check the double complex relations on every monomial up to the degree bound."""
    rep = Report(f"bicomplex (degree <= {degree_bound})")
    Q, Lq = W.Q, W.Lq
    failures = {k: [] for k in ("Q raises weight by 1", "L_q preserves weight", "Q^2 = 0", "L_q^2 = 0", "Q L_q + L_q Q = 0")}
    monos = form_monomials(W.data.pi_chart, degree_bound)
    for m in monos:
        w = m.weight()
        qm, lm = apply(Q, m), apply(Lq, m)
        if qm and qm.weight() != w + 1:
            failures["Q raises weight by 1"].append((m, qm))
        if lm and lm.weight() != w:
            failures["L_q preserves weight"].append((m, lm))
        r = apply(Q, qm)
        if r:
            failures["Q^2 = 0"].append((m, r))
        r = apply(Lq, lm)
        if r:
            failures["L_q^2 = 0"].append((m, r))
        r = apply(Q, lm) + apply(Lq, qm)
        if r:
            failures["Q L_q + L_q Q = 0"].append((m, r))
    for name, bad in failures.items():
        if bad:
            m, r = bad[0]
            rep.add(name, False, r, f"omega = {m} ({len(bad)} failing monomials)")
        else:
            rep.add(name, True, "0", f"{len(monos)} monomials")
    return rep


# ---------------------------------------------------------------------------
# finite-dimensional truncations


class TruncationNotInvariant(ValueError):
    """An operator maps a basis element outside the spanned subspace."""


@dataclass
class OperatorMatrix:
    matrix: sympy.Matrix
    labels: list[str]

    @property
    def dimension(self) -> int:
        return len(self.labels)

    @property
    def rank(self) -> int:
        return self.matrix.rank() if self.dimension else 0

    @property
    def nullity(self) -> int:
        return self.dimension - self.rank

    def squares_to_zero(self) -> bool:
        return (self.matrix * self.matrix).is_zero_matrix if self.dimension else True


def _coordinates(element, basis_keys: dict) -> dict[int, Fraction]:
    out = {}
    if isinstance(element, Section):
        items = (((a, k), c) for a, comp in element.components.items() for k, c in comp.items())
    else:
        items = iter(element.items())
    for key, c in items:
        if key not in basis_keys:
            raise TruncationNotInvariant(f"image term {key} lies outside the truncated subspace")
        out[basis_keys[key]] = c
    return out


def _basis_key(b):
    if isinstance(b, Section):
        ((a, comp),) = b.components.items()
        ((k, c),) = comp.items()
    else:
        ((k, c),) = b.items()
        a = None
    if c != 1:
        raise ValueError("basis elements must be monomials with coefficient 1")
    return (a, k) if a is not None else k


def operator_matrix(op: Callable, basis: Sequence) -> OperatorMatrix:
    """Exact matrix of a linear operator on the span of monomial basis elements.

    Column j holds the coordinates of ``op(basis[j])``. Raises
    TruncationNotInvariant instead of projecting when an image leaves the span.
    """
    keys = {_basis_key(b): i for i, b in enumerate(basis)}
    n = len(basis)
    M = sympy.zeros(n, n)
    for j, b in enumerate(basis):
        for i, c in _coordinates(op(b), keys).items():
            M[i, j] = sympy.Rational(c.numerator, c.denominator)
    return OperatorMatrix(M, [str(b) for b in basis])


def section_basis(data: AlgebroidData, degree_bound: int) -> list[Section]:
    """Sections f t_alpha with f a base monomial of degree <= bound."""
    out = []
    for a in data.fiber_names:
        for f in base_monomials(data.base_chart, degree_bound):
            out.append(f * data.basis(a))
    return out


def delta_matrix(W: QLA, degree_bound: int = 0) -> OperatorMatrix:
    return operator_matrix(lambda u: delta(W, u), section_basis(W.data, degree_bound))


def form_operator_matrix(W: QLA, which: str, degree_bound: int, max_weight: int | None = None) -> OperatorMatrix:
    basis = form_monomials(W.data.pi_chart, degree_bound, max_weight)
    return operator_matrix(lambda m: bicomplex_apply(W, m, which), basis)


__all__ = [
    "QLA",
    "NotQLA",
    "OperatorMatrix",
    "TruncationNotInvariant",
    "base_monomials",
    "bicomplex_apply",
    "bicomplex_check",
    "delta",
    "delta_matrix",
    "form_monomials",
    "form_operator_matrix",
    "is_left_central",
    "is_right_central",
    "is_homological",
    "loday",
    "operator_matrix",
    "qalgebroid_check",
    "qhat",
    "rho_L",
    "section_basis",
]
