from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CHART, polys
from qla.gpoly import Coord, SuperChart, parse, sign
from qla.schart import VectorField, apply, commutator, field_weight, is_homological

XT = SuperChart([Coord("x", 0), Coord("theta", 1)])


def vf(chart, parity, **comps):
    return VectorField(chart, parity, {k: parse(v, chart) for k, v in comps.items()})


@st.composite
def fields(draw, parity=None):
    if parity is None:
        parity = draw(st.integers(0, 1))
    comps = {}
    for c in CHART:
        if draw(st.booleans()):
            comps[c.name] = draw(polys(parity=(parity + c.parity) % 2, max_terms=2, max_exp=1))
    return VectorField(CHART, parity, comps)


def test_susy_q_on_coordinates(susy):
    Q = susy.data.Q_field
    chart = susy.data.pi_chart
    assert apply(Q, chart.gen("x")) == parse("xi + 1/2*z*theta", chart)
    assert apply(Q, chart.gen("theta")) == chart.gen("z")
    assert apply(Q, chart.one()).is_zero()


def test_component_parity_is_validated():
    with pytest.raises(ValueError):
        vf(XT, 1, x="x")


def test_commutator_examples():
    X = vf(XT, 0, x="x^2", theta="theta")
    assert commutator(X, X).is_zero()
    d_theta = VectorField.partial(XT, "theta")
    theta_dx = vf(XT, 1, x="theta")
    assert commutator(d_theta, theta_dx) == VectorField.partial(XT, "x")


def test_homological_examples(susy):
    assert is_homological(VectorField.zero(XT))
    assert is_homological(VectorField.partial(XT, "theta"))
    assert is_homological(susy.data.Q_field)
    assert not is_homological(VectorField.partial(XT, "x"))
    assert not is_homological(vf(XT, 1, x="theta", theta="1"))


def test_weights(susy):
    from qla.algebroid import iota, lie_derivative

    data = susy.data
    assert field_weight(data.Q_field) == 1
    assert field_weight(lie_derivative(susy.section("theta_q"))) == 0
    assert field_weight(iota(susy.section("tau"))) == -1
    assert field_weight(VectorField.zero(XT)) == "zero"
    mixed = VectorField(data.pi_chart, 1, {"x": parse("xi + theta", data.pi_chart)})
    assert field_weight(mixed) == "inhomogeneous"


def test_chart_mismatch():
    other = SuperChart([Coord("x", 0)])
    with pytest.raises(ValueError):
        apply(VectorField.partial(XT, "x"), parse("x", other))


@settings(max_examples=60, deadline=None)
@given(fields(), st.integers(0, 1), st.data())
def test_apply_is_graded_derivation(X, pf, data):
    f = data.draw(polys(parity=pf, max_terms=3))
    g = data.draw(polys(max_terms=3))
    lhs = apply(X, f * g)
    rhs = apply(X, f) * g + (f * apply(X, g)).scale(sign(X.parity * pf))
    assert lhs == rhs


@settings(max_examples=40, deadline=None)
@given(fields(), fields(), fields())
def test_graded_jacobi(X, Y, Z):
    lhs = commutator(X, commutator(Y, Z))
    rhs = commutator(commutator(X, Y), Z) + commutator(Y, commutator(X, Z)).scale(sign(X.parity * Y.parity))
    assert lhs == rhs


@settings(max_examples=60, deadline=None)
@given(fields(), fields(), polys(max_terms=3))
def test_commutator_matches_operator_commutator(X, Y, f):
    lhs = apply(commutator(X, Y), f)
    rhs = apply(X, apply(Y, f)) - apply(Y, apply(X, f)).scale(sign(X.parity * Y.parity))
    assert lhs == rhs
