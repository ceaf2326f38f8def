"""Divergences and local characteristic representatives of modular classes."""

from __future__ import annotations

from dataclasses import dataclass

from qla.algebroid import AlgebroidData, Section, iota, lie_derivative
from qla.gpoly import GradedPoly, SuperChart, check_parity, sign
from qla.report import Report
from qla.schart import VectorField, apply


@dataclass(frozen=True)
class LogDensity:
    """Berezin density ``D[x] exp(sigma)`` stored through its logarithm; sigma = 0 is the coordinate density."""

    chart: SuperChart
    sigma: GradedPoly

    def __post_init__(self):
        if self.sigma.chart != self.chart:
            raise ValueError("sigma must be a function on the density's chart")
        check_parity(self.sigma, 0, "log-density sigma")

    @classmethod
    def coordinate(cls, chart: SuperChart) -> "LogDensity":
        return cls(chart, chart.zero())

    def __add__(self, other: "LogDensity") -> "LogDensity":
        return LogDensity(self.chart, self.sigma + other.sigma)


def divergence(X: VectorField, d: LogDensity | None = None) -> GradedPoly:
    """Div X = sum_a (-1)^(|a|(|X|+1)) d_a X^a + X(sigma)."""
    chart = X.chart
    if d is not None and d.chart != chart:
        raise ValueError("density and vector field live over different charts")
    out = chart.zero()
    for name, comp in X.components.items():
        term = comp.diff(name)
        if chart.parity(name) * (X.parity + 1) % 2:
            term = -term
        out = out + term
    if d is not None and d.sigma:
        out = out + apply(X, d.sigma)
    return out


def char_rep_Q(data: AlgebroidData) -> GradedPoly:
    """phi_Q: divergence of Q with respect to the coordinate density."""
    return divergence(data.Q_field)


def _q_and_Lq(W):
    if isinstance(W, Section):
        return W, lie_derivative(W)
    return W.q, W.Lq


def char_rep_q(W) -> GradedPoly:
    """phi_q on the base: divergence of L_q with respect to the coordinate density.

    Accepts a QLA or a bare odd section (the formula makes sense either way).
    """
    q, Lq = _q_and_Lq(W)
    return q.algebroid.drop(divergence(Lq))


def displayed_rep_coefficients(data: AlgebroidData) -> dict[str, GradedPoly]:
    """C_alpha = (-1)^(|a|(|alpha|+1)) d_a Q^a_alpha + Q^beta_{alpha beta} as functions on the base.

    phi_Q = xi^alpha C_alpha and phi_q = q^alpha C_alpha.
    """
    chart = data.base_chart
    out = {}
    for al in data.fiber_names:
        acc = chart.zero()
        for a in chart.names:
            t = data.rho(al, a).diff(a)
            acc = acc + t.scale(sign(chart.parity(a) * (data.parity(al) + 1)))
        for be in data.fiber_names:
            acc = acc + data.Q(be, al, be)
        out[al] = acc
    return out


def divergence_identities(W, d: LogDensity | None = None) -> Report:
    """Q(Div L_q) + L_q(Div Q) = 0 and Q(phi_q) + L_q(phi_Q) = 0."""
    data = W.data
    chart = data.pi_chart
    d = d or LogDensity.coordinate(chart)
    Q, Lq = W.Q, W.Lq
    rep = Report("divergence identities")
    r1 = apply(Q, divergence(Lq, d)) + apply(Lq, divergence(Q, d))
    rep.add("Q(Div L_q) + L_q(Div Q) = 0", r1.is_zero(), r1, f"sigma = {d.sigma}")
    phi_q = data.lift(char_rep_q(W))
    phi_Q = char_rep_Q(data)
    r2 = apply(Q, phi_q) + apply(Lq, phi_Q)
    rep.add("Q(phi_q) + L_q(phi_Q) = 0", r2.is_zero(), r2)
    return rep


def rep_relation(W) -> Report:
    """phi_q = -iota_q phi_Q."""
    q, _ = _q_and_Lq(W)
    data = q.algebroid
    lhs = data.lift(char_rep_q(W))
    rhs = -apply(iota(q), char_rep_Q(data))
    diff = lhs - rhs
    rep = Report("representative relation")
    rep.add("phi_q = -iota_q phi_Q", diff.is_zero(), diff)
    return rep
