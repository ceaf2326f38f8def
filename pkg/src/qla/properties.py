"""Randomized invariant suites.

Each suite draws its cases from a seeded ``random.Random`` and returns a
:class:`~qla.report.Report` with one line per identity: the number of cases
tried and, on failure, the first residual together with the failing case.
Random algebroid data is produced by pushing a given algebroid through a
random change of basis, which turns constant structure functions into
coordinate-dependent ones while preserving every identity under test.
"""

from __future__ import annotations

import random
from fractions import Fraction
from dataclasses import dataclass, field

from qla.algebroid import (
    AlgebroidData,
    Section,
    anchor,
    bracket,
    change_basis,
    iota,
    lie_derivative,
    tangent_algebroid,
    transform_section,
    vector_field_section,
)
from qla.connection import (
    BundleData,
    BundleSection,
    Connection,
    curvature,
    is_flat,
    is_torsion_free,
    nabla,
    torsion,
)
from qla.gpoly import GradedPoly, sign
from qla.homsec import QLA, delta, loday, qalgebroid_check, qhat, rho_L
from qla.modular import (
    LogDensity,
    char_rep_Q,
    char_rep_q,
    displayed_rep_coefficients,
    divergence,
    divergence_identities,
    rep_relation,
)
from qla.morphism import BundleMorphism, anchor_morphism, is_qla_morphism, push_section
from qla.randgen import (
    DEFAULT_DEGREE,
    DEFAULT_SEED,
    random_basis_change,
    random_coeff,
    random_function,
    random_gamma,
    random_poly,
    random_section,
)
from qla.report import Report
from qla.schart import apply, commutator, is_homological


def _zero(x) -> bool:
    return x.is_zero()


class Tally:
    """Accumulates pass/fail per identity and writes one summary line each."""

    def __init__(self):
        self.order: list[str] = []
        self.count: dict[str, int] = {}
        self.first_failure: dict[str, tuple[str, str]] = {}
        self.fails: dict[str, int] = {}

    def record(self, name: str, residual, case: str) -> bool:
        if name not in self.count:
            self.order.append(name)
            self.count[name] = 0
            self.fails[name] = 0
        self.count[name] += 1
        ok = _zero(residual)
        if not ok:
            self.fails[name] += 1
            self.first_failure.setdefault(name, (str(residual), case))
        return ok

    def flag(self, name: str, ok: bool, case: str, residual: str = "") -> bool:
        if name not in self.count:
            self.order.append(name)
            self.count[name] = 0
            self.fails[name] = 0
        self.count[name] += 1
        if not ok:
            self.fails[name] += 1
            self.first_failure.setdefault(name, (residual or "condition false", case))
        return ok

    def into(self, report: Report) -> Report:
        for name in self.order:
            n, bad = self.count[name], self.fails[name]
            if bad:
                res, case = self.first_failure[name]
                report.add(name, False, res, f"{bad}/{n} cases fail; first: {case}")
            else:
                report.add(name, True, "0", f"{n} cases")
        return report


@dataclass
class Sample:
    """One randomized algebroid (and optionally a homological section on it)."""

    data: AlgebroidData
    q: Section | None
    label: str
    T: dict = field(default_factory=dict)

    @property
    def qla(self) -> QLA:
        return QLA(self.data, self.q)


def random_sample(data: AlgebroidData, q: Section | None, rng: random.Random, label: str = "") -> Sample:
    """Push ``data`` (and ``q``) through a random invertible change of basis."""
    T = random_basis_change(data, rng)
    new = change_basis(data, T)
    q_new = transform_section(q, new, T) if q is not None else None
    return Sample(new, q_new, label or "random basis", T)


def samples(data: AlgebroidData, q_pool, rng: random.Random, n: int):
    """``n`` samples: the original data first, then random changes of basis.

    ``q_pool`` is a list of homological sections, or a callable ``rng -> section``.
    """
    out = []
    for k in range(n):
        q = _draw_q(q_pool, rng)
        if k == 0:
            out.append(Sample(data, q, "given basis"))
        else:
            out.append(random_sample(data, q, rng, f"random basis #{k}"))
    return out


def _draw_q(q_pool, rng):
    if q_pool is None:
        return None
    if callable(q_pool):
        return q_pool(rng)
    if not q_pool:
        return None
    q = rng.choice(list(q_pool))
    return q.scale(random_coeff(rng))


def _rsec(data, rng, degree, parity=None):
    if parity is None:
        parity = rng.randint(0, 1)
    return random_section(data, parity, degree, rng)


def _rfunc(data, rng, degree):
    return random_function(data.base_chart, degree, rng)


def _koszul(*parities) -> int:
    return sign(sum(parities))


# ---------------------------------------------------------------------------
# bracket and anchor recovery


def derived_bracket_suite(data: AlgebroidData, rng: random.Random, cases: int = 100, degree: int = DEFAULT_DEGREE, per_sample: int = 10) -> Report:
    """Derived bracket/anchor recovery and the Leibniz rule on random section pairs."""
    t = Tally()
    pool = samples(data, None, rng, max(1, cases // per_sample))
    for k in range(cases):
        s = pool[k % len(pool)]
        d = s.data
        u, v = _rsec(d, rng, degree), _rsec(d, rng, degree)
        case = f"{s.label}, u = {u}, v = {v}"
        Q = d.Q_field
        lhs = iota(bracket(u, v))
        rhs = commutator(commutator(Q, iota(u)), iota(v))
        t.record("iota[u,v] = (-1)^u [[Q,iota_u],iota_v]", lhs - (rhs.scale(sign(u.parity))), case)
        rho = anchor(u)
        for a in d.base_chart.names:
            f = d.pi_chart.gen(a)
            via = apply(iota(u), apply(Q, f)).scale(sign(u.parity))
            t.record("rho(u) f = (-1)^u iota_u(Q f)", d.lift(rho.component(a)) - via, f"{case}, f = {a}")
        f = _rfunc(d, rng, degree)
        fp = f.homogeneous_parity() or 0
        lhs = bracket(u, f * v)
        first = apply(rho, f) * v
        rhs = _sum_sections(first, (f * bracket(u, v)).scale(_koszul(u.parity * fp)), u.parity + v.parity + fp)
        t.record("[u, f v] = rho(u)(f) v + (-1)^(uf) f [u,v]", _sub(lhs, rhs), f"{case}, f = {f}")
    return t.into(Report("bracket recovery and Leibniz rule"))


def _sum_sections(a: Section, b: Section, parity: int) -> Section:
    if a.is_zero():
        return b if not b.is_zero() else a.algebroid.zero_section(parity)
    if b.is_zero():
        return a
    return a + b


def _sub(a, b):
    if a.is_zero():
        return -b
    if b.is_zero():
        return a
    return a - b


# ---------------------------------------------------------------------------
# differential and odd Loday-Leibniz bracket


def loday_suite(data: AlgebroidData, q_pool, rng: random.Random, cases: int = 100, degree: int = DEFAULT_DEGREE, per_sample: int = 10) -> Report:
    t = Tally()
    pool = samples(data, q_pool, rng, max(1, cases // per_sample))
    for k in range(cases):
        s = pool[k % len(pool)]
        W = s.qla
        d = s.data
        u, v, w = (_rsec(d, rng, degree) for _ in range(3))
        f = _rfunc(d, rng, degree)
        fp = f.homogeneous_parity() or 0
        pu, pv = u.parity, v.parity
        case = f"{s.label}, q = {W.q}, u = {u}, v = {v}"

        t.record("delta^2 = 0", delta(W, delta(W, u)), case)
        lhs = delta(W, bracket(u, v))
        rhs = _sum_sections(bracket(delta(W, u), v), bracket(u, delta(W, v)).scale(sign(pu)), pu + pv + 1)
        t.record("delta[u,v] = [delta u,v] + (-1)^u [u,delta v]", _sub(lhs, rhs), case)

        lhs = loday(W, u, loday(W, v, w))
        rhs = _sum_sections(
            loday(W, loday(W, u, v), w),
            loday(W, v, loday(W, u, w)).scale(sign((pu + 1) * (pv + 1))),
            pu + pv + w.parity + 2,
        )
        t.record("Loday-Jacobi", _sub(lhs, rhs), f"{case}, w = {w}")

        lhs = loday(W, u, v)
        rhs = _sum_sections(
            loday(W, v, u).scale(-sign((pu + 1) * (pv + 1))),
            delta(W, bracket(u, v)).scale(sign(pu)),
            pu + pv + 1,
        )
        t.record("(u,v) = -(-1)^((u+1)(v+1)) (v,u) + (-1)^u delta[u,v]", _sub(lhs, rhs), case)

        lhs = loday(W, u, f * v)
        rl = rho_L(W, u)
        first = apply(rl, f) * v
        rhs = _sum_sections(first, (f * loday(W, u, v)).scale(sign((pu + 1) * fp)), pu + pv + fp + 1)
        t.record("left Leibniz", _sub(lhs, rhs), f"{case}, f = {f}")

        lhs = loday(W, f * u, v)
        rhs = right_leibniz_rhs(W, f, u, v)
        t.record("right Leibniz", _sub(lhs, rhs), f"{case}, f = {f}")

        lhs = rho_L(W, loday(W, u, v))
        rhs = commutator(anchor(delta(W, u)), anchor(delta(W, v))).scale(sign(pu + pv))
        t.record("rho_L((u,v)) = (-1)^(u+v) [rho(delta u), rho(delta v)]", lhs - rhs, case)

        t.record("parity of (u,v) is u+v+1", _parity_residual(loday(W, u, v), pu + pv + 1), case)
        t.record("(q,v) = 0", loday(W, W.q, v), case)
        t.record("(v,q) = 0", loday(W, v, W.q), case)
    return t.into(Report("odd Loday-Leibniz bracket"))


def right_leibniz_rhs(W: QLA, f: GradedPoly, u: Section, v: Section) -> Section:
    """f (u,v) - (-1)^((u+f+1)(v+1)) rho_L(v)(f) u + (-1)^(u+f) delta[f u, v] - (-1)^u f delta[u,v].

    Obtained from the symmetry anomaly of the bracket together with the left
    Leibniz rule; with f = 1 it reduces to (u,v) = (u,v).
    """
    fp = f.homogeneous_parity() or 0
    pu, pv = u.parity, v.parity
    pfu = (pu + fp) % 2
    parity = pfu + pv + 1
    terms = [
        f * loday(W, u, v),
        (apply(rho_L(W, v), f) * u).scale(-sign((pfu + 1) * (pv + 1))),
        delta(W, bracket(f * u, v)).scale(sign(pfu)),
        (f * delta(W, bracket(u, v))).scale(-sign(pu)),
    ]
    out = W.data.zero_section(parity)
    for term in terms:
        out = _sum_sections(out, term, parity)
    return out


class _Flag:
    def __init__(self, ok: bool, text: str):
        self.ok, self.text = ok, text

    def is_zero(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        return self.text


def _parity_residual(sec: Section, expected: int):
    return _Flag(sec.is_zero() or sec.parity == expected % 2, f"parity {sec.parity}")


# ---------------------------------------------------------------------------
# Q-algebroid structure


def qalgebroid_suite(data: AlgebroidData, q_pool, rng: random.Random, cases: int = 20) -> Report:
    t = Tally()
    for s in samples(data, q_pool, rng, cases):
        W = s.qla
        case = f"{s.label}, q = {W.q}"
        for r in qalgebroid_check(W).results:
            t.flag(r.check, r.passed, case, r.residual)
        Qh = qhat(W)
        t.flag("Qhat = Q + L_q homological", is_homological(Qh), case, str(commutator(Qh, Qh)))
    return t.into(Report("Q-algebroid"))


# ---------------------------------------------------------------------------
# modular representatives


def densities(data: AlgebroidData, degree: int = 2) -> list[LogDensity]:
    """sigma = 0, x^2 and x times each even monomial of degree <= ``degree``.

    ``x`` is the first even coordinate of the shifted chart.
    """
    from qla.homsec import base_monomials

    chart = data.pi_chart
    out = [LogDensity.coordinate(chart)]
    if not chart.even_names:
        return out
    x = chart.gen(chart.even_names[0])
    out.append(LogDensity(chart, x * x))
    for m in base_monomials(chart, degree):
        if m.parity() == "even":
            out.append(LogDensity(chart, x * m))
    return out


def modular_suite(data: AlgebroidData, q_pool, rng: random.Random, cases: int = 100, degree: int = DEFAULT_DEGREE, per_sample: int = 10) -> Report:
    t = Tally()
    pool = samples(data, q_pool, rng, max(1, cases // per_sample))
    seen = set()
    for k in range(cases):
        s = pool[k % len(pool)]
        d = s.data
        C = displayed_rep_coefficients(d)
        chart = d.pi_chart
        if id(s) not in seen:
            seen.add(id(s))
            phi_Q = char_rep_Q(d)
            disp = chart.zero()
            for a, c in C.items():
                disp = disp + chart.gen(d.coord_of(a)) * d.lift(c)
            t.record("phi_Q = xi^a C_a", phi_Q - disp, s.label)
            if s.q is not None:
                W = s.qla
                for sig in densities(d):
                    for r in divergence_identities(W, sig).results:
                        t.flag(r.check, r.passed, f"{s.label}, q = {W.q}, {r.location}", r.residual)
                if phi_Q.is_zero():
                    t.record("phi_Q = 0 implies phi_q = 0", char_rep_q(W), s.label)
        # phi_q for an arbitrary odd section (homological or not)
        u = _rsec(d, rng, degree, parity=1)
        disp = d.base_chart.zero()
        for a, c in C.items():
            disp = disp + u.component(a) * c
        t.record("phi_q = q^a C_a", char_rep_q(u) - disp, f"{s.label}, q = {u}")
        for r in rep_relation(u).results:
            t.flag(r.check, r.passed, f"{s.label}, q = {u}", r.residual)
        X = lie_derivative(u) if rng.random() < 0.5 else d.Q_field
        sig = LogDensity(chart, random_poly(chart, 0, 2, rng))
        sig2 = LogDensity(chart, random_poly(chart, 0, 2, rng))
        r = divergence(X, sig + sig2) - divergence(X, sig) - apply(X, sig2.sigma)
        t.record("Div_(s+s') X - Div_s X = X(s')", r, f"{s.label}, X = {X}, s' = {sig2.sigma}")
    return t.into(Report("modular representatives"))


# ---------------------------------------------------------------------------
# connections


def torsion_free_part(c: Connection) -> Connection:
    """Subtract half the torsion tensor: Gamma^g_(a b) - 1/2 T(t_a, t_b)^g."""
    data = c.algebroid
    gamma = dict(c.gamma)
    for a in data.fiber_names:
        for b in data.fiber_names:
            T = torsion(c, data.basis(a), data.basis(b))
            for g, val in T.components.items():
                key = (g, a, b)
                gamma[key] = gamma.get(key, data.base_chart.zero()) - val.scale(HALF)
    return Connection(data, c.bundle, gamma)


HALF = Fraction(1, 2)


def default_bundle(data: AlgebroidData) -> BundleData:
    return BundleData(data.base_chart, [("e", 0), ("eta", 1)])


def _rbsec(bundle: BundleData, rng, degree, parity=None) -> BundleSection:
    if parity is None:
        parity = rng.randint(0, 1)
    comps = {}
    for i in bundle.names:
        if rng.random() < 0.8:
            comps[i] = random_poly(bundle.base_chart, parity + bundle.parity(i), degree, rng)
    return BundleSection(bundle, parity, comps)


def connection_suite(data: AlgebroidData, q_pool, rng: random.Random, cases: int = 100, degree: int = 2, per_sample: int = 10, extra=()) -> Report:
    """Connection axioms, tensoriality and the nabla_q consequences.

    Connections are random Christoffel data on a rank 1|1 bundle and on A itself;
    ``extra`` adds fixed connections (defined on ``data``) to the flat/torsion checks.
    """
    t = Tally()
    pool = samples(data, q_pool, rng, max(1, cases // per_sample))
    for k in range(cases):
        s = pool[k % len(pool)]
        d = s.data
        bundle = default_bundle(d) if k % 2 == 0 else BundleData.of_algebroid(d)
        c = Connection(d, bundle, random_gamma(d, bundle, rng))
        u, v = _rsec(d, rng, degree), _rsec(d, rng, degree)
        u2 = _rsec(d, rng, degree, u.parity)
        sec, sec2 = _rbsec(bundle, rng, degree), None
        sec2 = _rbsec(bundle, rng, degree, sec.parity)
        f = _rfunc(d, rng, degree)
        fp = f.homogeneous_parity() or 0
        case = f"{s.label}, bundle {'/'.join(bundle.names)}, u = {u}, s = {sec}"

        t.record("nabla_(u+u') s = nabla_u s + nabla_u' s", _sub(nabla(c, _sum_sections(u, u2, u.parity), sec), _bsum(nabla(c, u, sec), nabla(c, u2, sec))), case)
        t.record("nabla_u (s+s') = nabla_u s + nabla_u s'", _sub(nabla(c, u, _bsum(sec, sec2)), _bsum(nabla(c, u, sec), nabla(c, u, sec2))), case)
        t.record("nabla_(f u) s = f nabla_u s", _sub(nabla(c, f * u, sec), f * nabla(c, u, sec)), f"{case}, f = {f}")
        lhs = nabla(c, u, f * sec)
        rhs = _bsum(apply(anchor(u), f) * sec, _koszul(u.parity * fp) * (f * nabla(c, u, sec)))
        t.record("nabla_u (f s) = rho(u)(f) s + (-1)^(uf) f nabla_u s", _sub(lhs, rhs), f"{case}, f = {f}")

        R = curvature(c, u, v, f * sec)
        t.record("R(u,v)(f s) = (-1)^(f(u+v)) f R(u,v) s", _sub(R, _koszul(fp * (u.parity + v.parity)) * (f * curvature(c, u, v, sec))), f"{case}, f = {f}")
        t.record("R(f u,v) s = f R(u,v) s", _sub(curvature(c, f * u, v, sec), f * curvature(c, u, v, sec)), f"{case}, f = {f}")

        if s.q is not None:
            W = s.qla
            q = W.q
            nq2 = nabla(c, q, nabla(c, q, sec))
            t.record("nabla_q^2 = 1/2 R(q,q)", _sub(nq2, HALF * curvature(c, q, q, sec)), f"{case}, q = {q}")
            t.record("nabla_q^2 (f s) = f nabla_q^2 s", _sub(nabla(c, q, nabla(c, q, f * sec)), f * nq2), f"{case}, q = {q}, f = {f}")
            flat = Connection(d, bundle, {})
            t.flag("trivial Christoffel data is flat", is_flat(flat), case)
            t.record("flat => nabla_q^2 = 0", nabla(flat, q, nabla(flat, q, sec)), f"{case}, q = {q}")
            if bundle == BundleData.of_algebroid(d):
                tf = torsion_free_part(c)
                t.flag("torsion-free part is torsion free", is_torsion_free(tf), case)
                qs = BundleSection(bundle, 1, q.components)
                t.record("torsion-free => nabla_q q = 0", nabla(tf, q, qs), f"{case}, q = {q}")
    for name, c, q in extra:
        if q is None:
            continue
        flat = is_flat(c)
        t.flag(f"{name}: classified flat={flat}", True, name)
        for i in c.bundle.names:
            e = c.bundle.basis(i)
            sq = nabla(c, q, nabla(c, q, e))
            if flat:
                t.record("flat => nabla_q^2 = 0", sq, f"{name}, e = {i}")
            t.record("nabla_q^2 = 1/2 R(q,q)", _sub(sq, HALF * curvature(c, q, q, e)), f"{name}, e = {i}")
        if c.bundle == BundleData.of_algebroid(c.algebroid) and is_torsion_free(c):
            t.record("torsion-free => nabla_q q = 0", nabla(c, q, BundleSection(c.bundle, 1, q.components)), name)
    return t.into(Report("connections"))


def _bsum(a: BundleSection, b: BundleSection) -> BundleSection:
    if a.is_zero():
        return b
    if b.is_zero():
        return a
    return a + b


# ---------------------------------------------------------------------------
# morphisms


def basis_change_morphism(s: Sample, source: AlgebroidData) -> BundleMorphism:
    """The identity of the bundle, viewed from the old basis to the new one: Phi_b^a' = T_b^a'."""
    return BundleMorphism(source, s.data, source.base_chart.gens(), s.T)


def morphism_suite(data: AlgebroidData, q_pool, rng: random.Random, cases: int = 50, degree: int = DEFAULT_DEGREE, per_sample: int = 5) -> Report:
    """Identity, anchor and change-of-basis morphisms; bracket and Loday preservation."""
    t = Tally()
    pool = []
    for _ in range(max(1, cases // per_sample)):
        q = _draw_q(q_pool, rng)
        src = random_sample(data, q, rng) if pool else Sample(data, q, "given basis")
        tgt = random_sample(src.data, src.q, rng, "random image basis")
        pool.append((src, tgt, basis_change_morphism(tgt, src.data)))
    for src, tgt, m in pool:
        W = src.qla
        case = f"{src.label}, q = {W.q}"
        ident = BundleMorphism.identity(src.data)
        for r in is_qla_morphism(W, W, ident).results:
            t.flag(f"identity: {r.check}", r.passed, f"{case}, {r.location}", r.residual)
        for r in is_qla_morphism(W, tgt.qla, m).results:
            t.flag(f"change of basis: {r.check}", r.passed, f"{case}, {r.location}", r.residual)
        if src.data.anchor_data:
            TM = tangent_algebroid(src.data.base_chart)
            am = anchor_morphism(src.data, TM)
            qt = vector_field_section(TM, anchor(W.q))
            for r in is_qla_morphism(W, QLA(TM, qt), am).results:
                t.flag(f"anchor: {r.check}", r.passed, f"{case}, {r.location}", r.residual)
    for k in range(cases):
        src, tgt, m = pool[k % len(pool)]
        W, V = src.qla, tgt.qla
        u, v = _rsec(src.data, rng, degree), _rsec(src.data, rng, degree)
        case = f"{src.label}, u = {u}, v = {v}"
        pu, pv = push_section(m, u), push_section(m, v)
        t.record("Phi[u,v] = [Phi u, Phi v]", _sub(push_section(m, bracket(u, v)), bracket(pu, pv)), case)
        t.record("Phi(u,v) = (Phi u, Phi v)", _sub(push_section(m, loday(W, u, v)), loday(V, pu, pv)), case)
        t.record("rho_L(u) = rho_L(Phi u)", rho_L(W, u) - rho_L(V, pu), case)
    return t.into(Report("morphisms"))


# ---------------------------------------------------------------------------
# bicomplex forms on the SUSY example


def bicomplex_suite(W: QLA, degree_bound: int = 3) -> Report:
    from qla.homsec import bicomplex_check

    return bicomplex_check(W, degree_bound)


# ---------------------------------------------------------------------------
# driver


def homological_pool(sections) -> list[Section]:
    from qla.algebroid import homological_residual

    return [s for s in sections if s.parity == 1 and homological_residual(s).is_zero()]


def run_all(defn, seed: int = DEFAULT_SEED, degree: int = DEFAULT_DEGREE, cases: int = 100) -> Report:
    """Every suite on one loaded definition; homological sections of the file seed the QLA suites."""
    rng = random.Random(seed)
    data = defn.data
    qs = homological_pool(defn.sections.values()) or [data.zero_section()]
    rep = Report(f"randomized invariants (seed {seed}, degree {degree}, {cases} cases)")
    rep.notes.append(f"seed = {seed}")
    rep.extend(derived_bracket_suite(data, rng, cases, degree), "bracket: ")
    rep.extend(loday_suite(data, qs, rng, cases, degree), "loday: ")
    rep.extend(qalgebroid_suite(data, qs, rng, max(2, cases // 10)), "Q-algebroid: ")
    rep.extend(modular_suite(data, qs, rng, cases, degree), "modular: ")
    extra = [(name, c, rng.choice(qs)) for name, c in sorted(defn.connections.items())]
    rep.extend(connection_suite(data, qs, rng, cases, min(degree, 2), extra=extra), "connection: ")
    rep.extend(morphism_suite(data, qs, rng, max(1, cases // 2), degree), "morphism: ")
    return rep
