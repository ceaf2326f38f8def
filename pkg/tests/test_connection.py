from __future__ import annotations

import random
from fractions import Fraction

import pytest

from qla.algebroid import AlgebroidData, FiberElement, bracket
from qla.connection import (
    BundleData,
    BundleSection,
    Connection,
    as_bundle_section,
    as_section,
    curvature,
    is_flat,
    is_torsion_free,
    nabla,
    nabla_q,
    torsion,
)
from qla.fileformat import load_fixture
from qla.gpoly import Coord, SuperChart
from qla.homsec import QLA
from qla.properties import connection_suite, torsion_free_part
from qla.randgen import random_gamma, random_section


def _sections(data, rng, n=10, degree=2):
    return [random_section(data, rng.randint(0, 1), degree, rng) for _ in range(n)]


def test_zero_christoffel_on_basis(susy):
    d = susy.data
    c = Connection(d, BundleData.of_algebroid(d))
    for a in d.fiber_names:
        for b in d.fiber_names:
            assert nabla(c, d.basis(a), as_bundle_section(d.basis(b))).is_zero()


def test_zero_christoffel_is_anchor_action(susy):
    d = susy.data
    bundle = BundleData(d.base_chart, [("e", 0), ("eta", 1)])
    c = Connection(d, bundle)
    u = susy.section("tau")
    s = bundle.section(0, {"e": "x^2", "eta": "theta*x"})
    # rho(tau) = d/dtheta + 1/2 theta d/dx
    assert nabla(c, u, s) == bundle.section(1, {"e": "theta*x", "eta": "x"})


def test_adjoint_connection_reproduces_bracket(gl11):
    d = gl11.data
    c = Connection.adjoint(d)
    pp, pm = gl11.section("psi_plus"), gl11.section("psi_minus")
    assert as_section(nabla(c, pp, as_bundle_section(pm)), d) == gl11.section("Z")
    for a in d.fiber_names:
        for b in d.fiber_names:
            lhs = as_section(nabla(c, d.basis(a), as_bundle_section(d.basis(b))), d)
            assert lhs == bracket(d.basis(a), d.basis(b))


def test_curvature_examples(gl11, susy):
    rng = random.Random(1)
    d = susy.data
    flat = Connection(d, BundleData.of_algebroid(d))
    for u in _sections(d, rng, 4):
        for v in _sections(d, rng, 3):
            s = as_bundle_section(random_section(d, rng.randint(0, 1), 2, rng))
            assert curvature(flat, u, v, s).is_zero()
    c = Connection(d, BundleData.of_algebroid(d), random_gamma(d, BundleData.of_algebroid(d), rng))
    u = random_section(d, 0, 2, rng)
    assert curvature(c, u, u, as_bundle_section(susy.section("tau"))).is_zero()
    assert is_flat(Connection.adjoint(gl11.data))
    assert not is_flat(Connection.adjoint(gl11.data, Fraction(1, 2)))


def test_torsion_examples(gl11):
    d = gl11.data
    adj = Connection.adjoint(d)
    half = Connection.adjoint(d, Fraction(1, 2))
    for a in d.fiber_names:
        for b in d.fiber_names:
            u, v = d.basis(a), d.basis(b)
            assert torsion(adj, u, v) == bracket(u, v)
            assert torsion(half, u, v).is_zero()
    assert is_torsion_free(half) and not is_torsion_free(adj)


def test_torsion_of_trivial_connection_on_abelian_algebroid(zero_alg):
    d = zero_alg.data
    c = Connection(d, BundleData.of_algebroid(d))
    assert is_torsion_free(c)


def test_torsion_requires_e_equal_a(susy):
    d = susy.data
    c = Connection(d, BundleData(d.base_chart, [("e", 0)]))
    with pytest.raises(ValueError):
        torsion(c, d.basis("t"), d.basis("t"))


def test_torsion_free_part(susy):
    rng = random.Random(8)
    d = susy.data
    bundle = BundleData.of_algebroid(d)
    c = Connection(d, bundle, random_gamma(d, bundle, rng))
    tf = torsion_free_part(c)
    assert is_torsion_free(tf)
    W = QLA(d, susy.section("theta_q"))
    assert nabla_q(W, tf, BundleSection(bundle, 1, W.q.components)).is_zero()


def test_nabla_q_examples(gl11, susy):
    W = QLA(gl11.data, gl11.section("psi_plus"))
    adj = Connection.adjoint(gl11.data)
    for i in adj.bundle.names:
        e = adj.bundle.basis(i)
        assert nabla_q(W, adj, nabla_q(W, adj, e)).is_zero()
    half = Connection.adjoint(gl11.data, Fraction(1, 2))
    for i in half.bundle.names:
        e = half.bundle.basis(i)
        sq = nabla_q(W, half, nabla_q(W, half, e))
        assert sq == Fraction(1, 2) * curvature(half, W.q, W.q, e)


def test_nabla_q_vanishes_on_purely_even_algebroid():
    base = SuperChart([Coord("x", 0)])
    d = AlgebroidData.from_brackets(base, [FiberElement("e", 0), FiberElement("f", 0)], {("e", "x"): base.one()}, {})
    q = d.zero_section()
    with pytest.raises(ValueError):
        d.section(1, {"e": "x"})
    W = QLA(d, q)
    bundle = BundleData(base, [("s", 0)])
    c = Connection(d, bundle, {("s", "e", "s"): base.gen("x")})
    assert nabla_q(W, c, bundle.section(0, {"s": "x^2 + 1"})).is_zero()


def test_nabla_q_leibniz(susy):
    W = QLA(susy.data, susy.section("theta_q"))
    d = susy.data
    rng = random.Random(3)
    bundle = BundleData(d.base_chart, [("e", 0), ("eta", 1)])
    c = Connection(d, bundle, random_gamma(d, bundle, rng))
    s = bundle.section(0, {"e": "x", "eta": "theta"})
    for text in ("x^2", "theta*x", "x + 1"):
        f = d.base_chart.parse(text)
        fp = f.homogeneous_parity()
        lhs = nabla_q(W, c, f * s)
        rhs = W.Qq(f) * s + (-1) ** fp * (f * nabla_q(W, c, s))
        assert lhs == rhs


def test_gamma_parity_checked(susy):
    d = susy.data
    bundle = BundleData(d.base_chart, [("e", 0)])
    with pytest.raises(ValueError):
        Connection(d, bundle, {("e", "t", "e"): d.base_chart.gen("theta")})


def test_bundle_chart_must_match(susy):
    other = SuperChart([Coord("y", 0)])
    with pytest.raises(ValueError):
        Connection(susy.data, BundleData(other, [("e", 0)]))


@pytest.mark.parametrize(
    "name, q", [("gl1_1", "psi_plus"), ("susy_action", "theta_q"), ("zero", "any_odd"), ("tangent_11", "Qq")]
)
def test_connection_axioms_randomized(name, q):
    defn = load_fixture(name)
    rep = connection_suite(defn.data, [defn.section(q)], random.Random(23), cases=20)
    assert rep.passed, rep.text()
