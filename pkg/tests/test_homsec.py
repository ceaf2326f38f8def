from __future__ import annotations

import random

import pytest
import sympy

from qla.algebroid import anchor, bracket
from qla.fileformat import load_fixture
from qla.gpoly import parse, sign
from qla.homsec import (
    QLA,
    NotQLA,
    TruncationNotInvariant,
    base_monomials,
    bicomplex_apply,
    bicomplex_check,
    delta,
    delta_matrix,
    form_operator_matrix,
    is_left_central,
    is_right_central,
    loday,
    operator_matrix,
    qalgebroid_check,
    qhat,
    rho_L,
    section_basis,
)
from qla.properties import loday_suite
from qla.schart import commutator, field_weight, is_homological


@pytest.fixture
def susy_x(susy):
    return QLA(susy.data, susy.section("theta_x"), "theta_x")


@pytest.fixture
def gl_plus(gl11):
    return QLA(gl11.data, gl11.section("psi_plus"), "psi_plus")


def test_construction_rejects_non_homological(susy):
    with pytest.raises(NotQLA, match="not homological"):
        QLA(susy.data, susy.section("tau"))
    with pytest.raises(NotQLA, match="odd"):
        QLA(susy.data, susy.section("t"))


def test_construction_rejects_non_lie_data():
    d = load_fixture("almost_jacobi").data
    with pytest.raises(NotQLA):
        QLA(d, d.zero_section())


# --- differential and derived bracket ---------------------------------------------


def test_delta_examples(susy, susy_x):
    assert delta(susy_x, susy_x.q).is_zero()
    assert delta(susy_x, susy.data.zero_section()).is_zero()
    # q = theta x t, tau constant: only -(-1)^(1) tau^tau rho(tau)(q^t) = 1/2 theta*theta + x survives
    assert delta(susy_x, susy.section("tau")) == susy.data.section(0, {"t": "x"})


def test_loday_tau_tau(susy, susy_x):
    # (tau, tau) = -[[q,tau],tau] = -[x t, tau]; [x t, tau]^t = -rho(tau)(x) = -1/2 theta
    tau = susy.section("tau")
    assert loday(susy_x, tau, tau) == susy.data.section(1, {"t": "1/2*theta"})


def test_q_is_central_for_its_bracket(susy, susy_x):
    rng = random.Random(4)
    from qla.randgen import random_section

    for _ in range(20):
        v = random_section(susy.data, rng.randint(0, 1), 3, rng)
        assert loday(susy_x, susy_x.q, v).is_zero()
        assert loday(susy_x, v, susy_x.q).is_zero()


def test_loday_parity_on_basis_pairs(gl_plus, gl11):
    d = gl11.data
    for a in d.fiber_names:
        for b in d.fiber_names:
            u, v = d.basis(a), d.basis(b)
            w = loday(gl_plus, u, v)
            assert w.is_zero() or w.parity == (u.parity + v.parity + 1) % 2


# --- left anchor and centrality --------------------------------------------------


def test_rho_l_of_q_vanishes(susy_x, gl_plus):
    assert rho_L(susy_x, susy_x.q).is_zero()
    assert rho_L(gl_plus, gl_plus.q).is_zero()


def test_rho_l_on_zero_algebroid(zero_alg):
    W = QLA(zero_alg.data, zero_alg.section("any_odd"))
    assert rho_L(W, zero_alg.section("any_even")).is_zero()


def test_rho_l_on_tangent_qla(tangent):
    W = QLA(tangent.data, tangent.section("Qq"))
    Q = anchor(W.q)
    for name in ("Dx", "Qx", "Qq"):
        X = tangent.section(name)
        expected = commutator(Q, anchor(X)).scale(sign(X.parity))
        assert rho_L(W, X) == expected


def test_centrality(gl11, gl_plus, susy, susy_x):
    assert is_left_central(gl_plus, gl_plus.q) and is_right_central(gl_plus, gl_plus.q)
    Z = gl11.section("Z")  # central for the Lie bracket
    assert is_left_central(gl_plus, Z) and is_right_central(gl_plus, Z)
    zero = gl11.data.zero_section()
    assert is_left_central(gl_plus, zero) and is_right_central(gl_plus, zero)
    assert is_left_central(susy_x, susy_x.q) and is_right_central(susy_x, susy_x.q, degree_bound=2)
    assert is_left_central(gl_plus, gl11.section("psi_minus"))  # (psi_m, v) = -[Z, v] = 0
    assert not is_left_central(gl_plus, gl11.section("N"))
    assert not is_right_central(susy_x, susy.section("tau"), degree_bound=1)


# --- Q-algebroid and bicomplex ---------------------------------------------------


@pytest.mark.parametrize("q", ["x", "x^2 + 1", "3*x^3 - 1/2", "1", "x^4 + x"])
def test_susy_qalgebroid(susy, q):
    W = QLA(susy.data, susy.data.section(1, {"t": f"theta*({q})"}))
    assert qalgebroid_check(W).passed
    Qh = qhat(W)
    assert is_homological(Qh)
    assert field_weight(Qh) == "inhomogeneous"


def test_trivial_q(susy):
    W = QLA(susy.data, susy.data.zero_section())
    assert W.Lq.is_zero()
    assert qalgebroid_check(W).passed
    assert qhat(W) == W.Q


def test_zero_algebroid_qhat_vanishes(zero_alg):
    W = QLA(zero_alg.data, zero_alg.section("any_odd"))
    assert qhat(W).is_zero()


def test_tangent_qla_is_de_rham_with_lie_derivative(tangent):
    d = tangent.data
    W = QLA(d, tangent.section("Qq"))
    assert qalgebroid_check(W).passed
    pc = d.pi_chart
    Qvec = anchor(W.q)
    for f in ("x^2", "theta*x", "x^3 + theta"):
        base_f = parse(f, d.base_chart)
        assert bicomplex_apply(W, d.lift(base_f), "Lq") == d.lift(Qvec(base_f))
    # L_q commutes with d on every coordinate
    for c in pc.names:
        g = pc.gen(c)
        assert W.Lq(W.Q(g)) == -W.Q(W.Lq(g))


def test_lq_on_base_functions_is_qq(susy):
    W = QLA(susy.data, susy.section("theta_q"))
    f = parse("x^3 + theta*x", susy.data.base_chart)
    assert bicomplex_apply(W, susy.data.lift(f), "Lq") == susy.data.lift(W.Qq(f))


@pytest.mark.parametrize("p", range(5))
def test_susy_forms_are_lq_closed(susy, p):
    W = QLA(susy.data, susy.section("theta_q"))
    pc = susy.data.pi_chart
    for omega_x in ("1", "x", "x^3 - 2*x"):
        omega = parse(f"z^{p}*theta*({omega_x})", pc)
        assert bicomplex_apply(W, omega, "Lq").is_zero()


def test_constant_form(susy):
    W = QLA(susy.data, susy.section("theta_q"))
    c = susy.data.pi_chart.const(3)
    assert bicomplex_apply(W, c, "Q").is_zero() and bicomplex_apply(W, c, "Lq").is_zero()
    with pytest.raises(ValueError):
        bicomplex_apply(W, c, "d")


def test_bicomplex_check_on_fixtures(susy, gl_plus, tangent):
    assert bicomplex_check(QLA(susy.data, susy.section("theta_q")), 3).passed
    assert bicomplex_check(gl_plus, 3).passed
    assert bicomplex_check(QLA(tangent.data, tangent.section("Qx")), 3).passed


# --- truncated operator matrices ------------------------------------------------------


def test_zero_operator_matrix(susy):
    basis = base_monomials(susy.data.pi_chart, 2)
    M = operator_matrix(lambda m: susy.data.pi_chart.zero(), basis)
    assert M.matrix.is_zero_matrix
    assert M.nullity == M.dimension == len(basis)


def test_delta_matrix_gl11(gl11, gl_plus):
    M = delta_matrix(gl_plus)
    assert M.dimension == 4
    assert M.squares_to_zero()
    # oracle: apply the bracket table twice by hand
    basis = section_basis(gl11.data, 0)
    for b in basis:
        assert bracket(gl_plus.q, bracket(gl_plus.q, b)).is_zero()
    assert M.rank == 2  # delta N = -2 psi_p, delta psi_m = Z
    assert M.matrix == sympy.Matrix(
        [[0, 0, 0, 0], [0, 0, 0, 1], [-2, 0, 0, 0], [0, 0, 0, 0]]
    )


def test_lq_matrix_on_susy_forms(susy):
    W = QLA(susy.data, susy.data.section(1, {"t": "theta"}))
    M = form_operator_matrix(W, "Lq", degree_bound=3, max_weight=1)
    assert M.squares_to_zero()
    for m in base_monomials(susy.data.pi_chart, 3):
        if m.weight() <= 1:
            assert W.Lq(W.Lq(m)).is_zero()


def test_truncation_must_be_invariant(susy):
    W = QLA(susy.data, susy.section("theta_q"))
    with pytest.raises(TruncationNotInvariant):
        form_operator_matrix(W, "Lq", degree_bound=2, max_weight=1)


# --- randomized identities ----------------------------------------------------------


@pytest.mark.parametrize(
    "name, q",
    [("gl1_1", "psi_plus"), ("gl1_1", "psi_minus"), ("susy_action", "theta_q"), ("zero", "any_odd"), ("tangent_11", "Qq")],
)
def test_loday_identities(name, q):
    defn = load_fixture(name)
    rep = loday_suite(defn.data, [defn.section(q)], random.Random(17), cases=30)
    assert rep.passed, rep.text()
