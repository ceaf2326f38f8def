"""Vector bundle morphisms between Lie algebroids and their Q-manifold description.

A morphism is given locally by ``y^i = phi^i(x)`` on the bases and
``theta^mu = xi^alpha Phi_alpha^mu(x)`` on the shifted fibers. It is a Lie algebroid
morphism iff ``Q_A o Phi* = Phi* o Q_B``; that identity is an equality of
derivations along an algebra morphism, so checking it on the generators of the
target is enough.
"""

from __future__ import annotations

from typing import Mapping

from qla.algebroid import AlgebroidData, Section, anchor
from qla.gpoly import GradedPoly, check_parity, substitute
from qla.report import Report
from qla.schart import apply


class BundleMorphism:
    """``base_map[i] = phi^i`` (over the source base) and ``fiber_map[(alpha, mu)] = Phi_alpha^mu``."""

    def __init__(
        self,
        source: AlgebroidData,
        target: AlgebroidData,
        base_map: Mapping[str, GradedPoly],
        fiber_map: Mapping[tuple[str, str], GradedPoly],
    ):
        self.source = source
        self.target = target
        sb, tb = source.base_chart, target.base_chart
        self.base_map: dict[str, GradedPoly] = {}
        for i in tb.names:
            if i not in base_map:
                raise ValueError(f"base map gives no image for target coordinate {i!r}")
            val = base_map[i]
            if val.chart != sb:
                raise ValueError(f"image of {i!r} must be a function on the source base")
            check_parity(val, tb.parity(i), f"base map image of {i!r}")
            self.base_map[i] = val
        extra = set(base_map) - set(tb.names)
        if extra:
            raise ValueError(f"base map mentions unknown target coordinates {sorted(extra)}")
        self.fiber_map: dict[tuple[str, str], GradedPoly] = {}
        for (al, mu), val in fiber_map.items():
            source._check_index(al)
            target._check_index(mu)
            if val.chart != sb:
                raise ValueError(f"Phi_{al}^{mu} must be a function on the source base")
            check_parity(val, source.parity(al) + target.parity(mu), f"Phi_({al})^({mu})")
            if val:
                self.fiber_map[(al, mu)] = val

    def Phi(self, alpha: str, mu: str) -> GradedPoly:
        return self.fiber_map.get((alpha, mu), self.source.base_chart.zero())

    @classmethod
    def identity(cls, data: AlgebroidData) -> "BundleMorphism":
        one = data.base_chart.one()
        return cls(data, data, data.base_chart.gens(), {(a, a): one for a in data.fiber_names})

    def is_base_preserving(self) -> bool:
        sb = self.source.base_chart
        return sb == self.target.base_chart and all(self.base_map[n] == sb.gen(n) for n in sb.names)

    def pull_base(self, f: GradedPoly) -> GradedPoly:
        """phi^* on functions of the target base."""
        return substitute(f, self.base_map, self.source.base_chart)


def pullback(m: BundleMorphism) -> dict[str, GradedPoly]:
    """Images of the target shifted-bundle coordinates: y^i -> phi^i(x), theta^mu -> xi^alpha Phi_alpha^mu(x)."""
    src, tgt = m.source, m.target
    chart = src.pi_chart
    images = {i: src.lift(v) for i, v in m.base_map.items()}
    for f in tgt.fiber:
        acc = chart.zero()
        for g in src.fiber:
            val = m.fiber_map.get((g.name, f.name))
            if val is not None:
                acc = acc + chart.gen(g.coord) * src.lift(val)
        images[f.coord] = acc
    return images


def pull(m: BundleMorphism, f: GradedPoly) -> GradedPoly:
    return substitute(f, pullback(m), m.source.pi_chart)


def lie_morphism_report(m: BundleMorphism) -> Report:
    rep = Report("Lie algebroid morphism")
    QA, QB = m.source.Q_field, m.target.Q_field
    images = pullback(m)
    tchart = m.target.pi_chart
    for name in tchart.names:
        lhs = apply(QA, images[name])
        rhs = substitute(apply(QB, tchart.gen(name)), images, m.source.pi_chart)
        r = lhs - rhs
        rep.add("Q_A o Phi* = Phi* o Q_B", r.is_zero(), r, f"generator {name}")
    return rep


def is_lie_morphism(m: BundleMorphism) -> bool:
    return lie_morphism_report(m).passed


def phi_relation_residual(m: BundleMorphism, s: Section, r: Section) -> dict[str, GradedPoly]:
    """s^alpha Phi_alpha^mu - r^mu(phi(x)) for each target index mu (nonzero entries only)."""
    if s.parity != 1 or r.parity != 1:
        raise ValueError("Phi-relatedness is defined for odd sections")
    if s.algebroid != m.source or r.algebroid != m.target:
        raise ValueError("sections do not match the morphism's source and target")
    out = {}
    for mu in m.target.fiber_names:
        acc = m.source.base_chart.zero()
        for al, sa in s.components.items():
            val = m.fiber_map.get((al, mu))
            if val is not None:
                acc = acc + sa * val
        res = acc - m.pull_base(r.component(mu))
        if res:
            out[mu] = res
    return out


def are_phi_related(m: BundleMorphism, s: Section, r: Section) -> bool:
    return not phi_relation_residual(m, s, r)


def anchor_intertwining_residuals(m: BundleMorphism) -> dict[tuple[str, str], GradedPoly]:
    """rho_alpha^a d_a phi^i - Phi_alpha^mu (rho_mu^i o phi), nonzero entries only."""
    src, tgt = m.source, m.target
    out = {}
    for al in src.fiber_names:
        for i in tgt.base_chart.names:
            lhs = src.base_chart.zero()
            for a in src.base_chart.names:
                ra = src.rho(al, a)
                if ra:
                    lhs = lhs + ra * m.base_map[i].diff(a)
            rhs = src.base_chart.zero()
            for mu in tgt.fiber_names:
                val = m.fiber_map.get((al, mu))
                if val is not None:
                    rhs = rhs + val * m.pull_base(tgt.rho(mu, i))
            if lhs != rhs:
                out[(al, i)] = lhs - rhs
    return out


def is_qla_morphism(source, target, m: BundleMorphism) -> Report:
    """Lie morphism plus Phi-related homological sections; also checks the induced Q-manifold morphism of the bases."""
    rep = Report("Q-Lie algebroid morphism")
    rep.extend(lie_morphism_report(m))
    res = phi_relation_residual(m, source.q, target.q)
    if res:
        for mu, r in res.items():
            rep.add("q_A, q_B Phi-related", False, r, f"index {mu}")
    else:
        rep.add("q_A, q_B Phi-related", True)
    QM, QN = anchor(source.q), anchor(target.q)
    for i in m.target.base_chart.names:
        lhs = apply(QM, m.base_map[i])
        rhs = m.pull_base(QN.component(i))
        r = lhs - rhs
        rep.add("Q_M o phi* = phi* o Q_N", r.is_zero(), r, f"coordinate {i}")
    return rep


def push_section(m: BundleMorphism, u: Section) -> Section:
    """(Phi u)^mu = u^alpha Phi_alpha^mu for a base-preserving morphism."""
    if not m.is_base_preserving():
        raise ValueError("sections can only be pushed forward along base-preserving morphisms")
    if u.algebroid != m.source:
        raise ValueError("section does not belong to the morphism's source")
    comps = {}
    for mu in m.target.fiber_names:
        acc = m.source.base_chart.zero()
        for al, ua in u.components.items():
            val = m.fiber_map.get((al, mu))
            if val is not None:
                acc = acc + ua * val
        if acc:
            comps[mu] = acc
    return Section(m.target, u.parity, comps)


def compose(first: BundleMorphism, second: BundleMorphism) -> BundleMorphism:
    """second o first: base maps compose by substitution, fiber maps by Phi_a^mu (Psi_mu^nu o phi)."""
    if first.target != second.source:
        raise ValueError("morphisms are not composable")
    base = {i: first.pull_base(v) for i, v in second.base_map.items()}
    fiber = {}
    chart = first.source.base_chart
    for al in first.source.fiber_names:
        for nu in second.target.fiber_names:
            acc = chart.zero()
            for mu in first.target.fiber_names:
                a = first.fiber_map.get((al, mu))
                b = second.fiber_map.get((mu, nu))
                if a is not None and b is not None:
                    acc = acc + a * first.pull_base(b)
            if acc:
                fiber[(al, nu)] = acc
    return BundleMorphism(first.source, second.target, base, fiber)


def anchor_morphism(data: AlgebroidData, tangent: AlgebroidData, basis_prefix: str = "D") -> BundleMorphism:
    """A -> TM given by the anchor: Phi_alpha^{D x^a} = Q^a_alpha."""
    fiber = {}
    for (al, a), val in data.anchor_data.items():
        fiber[(al, f"{basis_prefix}{a}")] = val
    return BundleMorphism(data, tangent, data.base_chart.gens(), fiber)
