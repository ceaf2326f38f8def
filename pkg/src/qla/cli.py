"""Command line interface: ``qla COMMAND FILE [options]``.

Exit codes: 0 when every check passes, 1 when a mathematical check fails
(the report names the identity and its residual), 2 for input or usage errors.
Files that do not exist on disk are looked up among the bundled fixtures, so
``qla check susy_action.qla`` works from any directory.
"""

from __future__ import annotations

import functools
import json
import sys
from fractions import Fraction

import click

from qla.algebroid import (
    anchor,
    bracket,
    homological_residual,
    iota,
    lie_derivative,
    verify,
)
from qla.connection import BundleData, BundleSection, curvature, is_flat, is_torsion_free, nabla
from qla.fileformat import DefinitionError, build_morphism, load, load_morphism_file
from qla.gpoly import ParseError
from qla.homsec import QLA, bicomplex_check, delta, loday, qalgebroid_check, qhat
from qla.modular import (
    LogDensity,
    char_rep_Q,
    char_rep_q,
    displayed_rep_coefficients,
    divergence_identities,
    rep_relation,
)
from qla.morphism import anchor_intertwining_residuals, is_qla_morphism, lie_morphism_report
from qla.randgen import DEFAULT_DEGREE, DEFAULT_SEED
from qla.report import Report
from qla.schart import commutator, field_weight, is_homological


class InputError(Exception):
    """Raised for anything that should end with exit code 2."""


def _emit(report: Report, values: list[tuple[str, str]], fmt: str) -> None:
    if fmt == "json":
        for name, val in values:
            click.echo(json.dumps({"check": name, "status": "value", "residual": "", "location": "", "value": val}))
        for r in report.results:
            click.echo(json.dumps(r.as_record()))
        for note in report.notes:
            click.echo(json.dumps({"check": "note", "status": "info", "residual": "", "location": "", "value": note}))
        click.echo(json.dumps({"check": report.title, "status": "pass" if report.passed else "fail", "residual": "", "location": "summary"}))
    else:
        for name, val in values:
            click.echo(f"{name} = {val}")
        click.echo(report.text())


def command(fn):
    """Wrap a command body: map input problems to exit 2 and failed reports to exit 1."""

    @functools.wraps(fn)
    def wrapper(*args, fmt: str, **kwargs):
        try:
            report, values = fn(*args, **kwargs)
        except (DefinitionError, InputError, ParseError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        _emit(report, values, fmt)
        sys.exit(0 if report.passed else 1)

    wrapper = click.option(
        "--format", "fmt", type=click.Choice(["text", "json"]), default="text", show_default=True, help="Output format."
    )(wrapper)
    return wrapper


def _section(defn, name: str, parity: int | None = None, what: str = "section"):
    s = defn.section(name)
    if parity is not None and s.parity != parity and not s.is_zero():
        kind = "odd" if parity else "even"
        raise InputError(f"{what} {name!r} must be {kind}")
    return s


def _qla_or_report(defn, name: str, rep: Report):
    """The QLA for section ``name``, or None after recording why it is not one."""
    q = _section(defn, name, 1, "--q section")
    lie = verify(defn.data, "lie")
    if not lie.passed:
        rep.extend(lie)
        return None
    res = homological_residual(q)
    rep.add("1/2[q,q] = 0", res.is_zero(), res, f"section {name}")
    if not res.is_zero():
        return None
    return QLA(defn.data, q, name)


@click.group()
def main():
    """Exact checks for Lie superalgebroids with homological sections."""


@main.command()
@click.argument("path")
@click.option("--mode", type=click.Choice(["lie", "almost"]), default="lie", show_default=True)
@command
def check(path, mode):
    """Verify [Q,Q] = 0 (lie) or only its base components (almost)."""
    defn = load(path)
    rep = verify(defn.data, mode)
    return rep, [("Q", str(defn.data.Q_field))]


@main.command()
@click.argument("path")
@click.option("--section", "name", required=True, help="Name of an odd section.")
@command
def homological(path, name):
    """Test whether a section squares to zero under the bracket."""
    defn = load(path)
    q = _section(defn, name, 1)
    res = homological_residual(q)
    rep = Report(f"homological section {name}")
    rep.add("1/2[q,q] = 0", res.is_zero(), res, f"section {name}")
    return rep, [("[q,q]", str(bracket(q, q)))]


@main.command("bracket")
@click.argument("path")
@click.option("--left", required=True)
@click.option("--right", required=True)
@command
def bracket_cmd(path, left, right):
    """Lie bracket of two named sections."""
    defn = load(path)
    u, v = _section(defn, left), _section(defn, right)
    rep = Report(f"bracket [{left},{right}]")
    return rep, [(f"[{left},{right}]", str(bracket(u, v))), ("rho(" + left + ")", str(anchor(u)))]


@main.command("derived-bracket")
@click.argument("path")
@click.option("--left", required=True)
@click.option("--right", required=True)
@click.option("--q", "qname", required=True, help="Homological section generating the bracket.")
@command
def derived_bracket(path, left, right, qname):
    """Odd Loday-Leibniz bracket (u,v) = (-1)^u [[q,u],v]."""
    defn = load(path)
    u, v = _section(defn, left), _section(defn, right)
    rep = Report(f"derived bracket ({left},{right}) for q = {qname}")
    W = _qla_or_report(defn, qname, rep)
    if W is None:
        return rep, []
    val = loday(W, u, v)
    expected = (u.parity + v.parity + 1) % 2
    rep.add("parity of (u,v) is u+v+1", val.is_zero() or val.parity == expected, f"parity {val.parity}")
    r1, r2 = loday(W, W.q, v), loday(W, u, W.q)
    rep.add("(q,v) = 0", r1.is_zero(), r1, f"v = {right}")
    rep.add("(u,q) = 0", r2.is_zero(), r2, f"u = {left}")
    return rep, [(f"({left},{right})", str(val)), (f"delta {left}", str(delta(W, u))), (f"delta {right}", str(delta(W, v)))]


@main.command("lie-derivative")
@click.argument("path")
@click.option("--section", "name", required=True)
@command
def lie_derivative_cmd(path, name):
    """iota_u and L_u = [Q, iota_u] on the shifted bundle."""
    defn = load(path)
    u = _section(defn, name)
    L = lie_derivative(u)
    w = field_weight(L)
    rep = Report(f"Lie derivative along {name}")
    rep.add("weight(L_u) = 0", w in (0, "zero"), w)
    if u.parity == 1 and homological_residual(u).is_zero():
        c = commutator(L, L)
        rep.add("[L_u,L_u] = 0", c.is_zero(), c)
    return rep, [(f"iota_{name}", str(iota(u))), (f"L_{name}", str(L))]


@main.command()
@click.argument("path")
@click.option("--q", "qname", default=None, help="Homological section for phi_q.")
@click.option("--sigma", default=None, help="Log-density sigma over the shifted chart (default: file's [density] or 0).")
@command
def modular(path, qname, sigma):
    """Local characteristic representatives phi_Q and phi_q."""
    defn = load(path)
    data = defn.data
    if sigma is not None:
        try:
            d = LogDensity(data.pi_chart, data.pi_chart.parse(sigma))
        except ValueError as exc:
            raise InputError(f"--sigma: {exc}") from None
    else:
        d = defn.density or LogDensity.coordinate(data.pi_chart)
    rep = Report("modular representatives")
    C = displayed_rep_coefficients(data)
    phi_Q = char_rep_Q(data)
    disp = data.pi_chart.zero()
    for a, c in C.items():
        disp = disp + data.pi_chart.gen(data.coord_of(a)) * data.lift(c)
    rep.add("phi_Q = xi^a C_a", phi_Q == disp, phi_Q - disp)
    values = [("phi_Q", str(phi_Q))]
    if qname is not None:
        W = _qla_or_report(defn, qname, rep)
        if W is None:
            return rep, values
        phi_q = char_rep_q(W)
        qdisp = data.base_chart.zero()
        for a, c in C.items():
            qdisp = qdisp + W.q.component(a) * c
        rep.add("phi_q = q^a C_a", phi_q == qdisp, phi_q - qdisp)
        rep.extend(rep_relation(W))
        rep.extend(divergence_identities(W, d))
        values.append(("phi_q", str(phi_q)))
        values.append(("sigma", str(d.sigma)))
    return rep, values


@main.command()
@click.argument("path")
@click.option("--q", "qname", required=True)
@click.option("--degree", default=3, show_default=True, type=click.IntRange(0, 12))
@command
def bicomplex(path, qname, degree):
    """Q-algebroid relations and the double complex on forms up to a degree."""
    defn = load(path)
    rep = Report(f"bicomplex for q = {qname}")
    W = _qla_or_report(defn, qname, rep)
    if W is None:
        return rep, []
    rep.extend(qalgebroid_check(W))
    Qh = qhat(W)
    rep.add("Qhat = Q + L_q homological", is_homological(Qh), commutator(Qh, Qh))
    rep.extend(bicomplex_check(W, degree))
    return rep, [("Q", str(W.Q)), ("L_q", str(W.Lq))]


@main.command()
@click.argument("path")
@click.option("--target", required=True, help="Definition file of the target algebroid.")
@click.option("--map", "map_path", required=True, help="File with a single [morphism] block.")
@command
def morphism(path, target, map_path):
    """Check a bundle map for Lie / Q-Lie algebroid morphism conditions."""
    source = load(path)
    tgt = load(target)
    spec = load_morphism_file(map_path)
    m = build_morphism(spec, source, tgt, map_path)
    rep = Report(f"morphism {spec.name}")
    if spec.source_q or spec.target_q:
        if not (spec.source_q and spec.target_q):
            raise InputError("map file must give both source_q and target_q, or neither")
        WA = _qla_or_report(source, spec.source_q, rep)
        WB = _qla_or_report(tgt, spec.target_q, rep)
        if WA is None or WB is None:
            return rep, []
        rep.extend(is_qla_morphism(WA, WB, m))
    else:
        rep.extend(lie_morphism_report(m))
    if rep.passed:
        res = anchor_intertwining_residuals(m)
        if res:
            for (al, i), r in res.items():
                rep.add("anchor intertwining", False, r, f"({al}, {i})")
        else:
            rep.add("anchor intertwining", True)
    values = [(f"Phi_{al}^{mu}", str(v)) for (al, mu), v in sorted(m.fiber_map.items())]
    values += [(f"phi^{i}", str(v)) for i, v in m.base_map.items()]
    return rep, values


@main.command("connection-check")
@click.argument("path")
@click.option("--bundle", "bname", required=True, help="Name of a [bundle NAME] block.")
@click.option("--q", "qname", default=None)
@command
def connection_check(path, bname, qname):
    """Flatness, torsion and the nabla_q consequences for a named connection."""
    defn = load(path)
    if bname not in defn.connections:
        known = ", ".join(sorted(defn.connections)) or "none"
        raise InputError(f"no bundle named {bname!r} (known: {known})")
    c = defn.connections[bname]
    rep = Report(f"connection {bname}")
    flat = is_flat(c)
    on_A = c.bundle == BundleData.of_algebroid(defn.data)
    tf = is_torsion_free(c) if on_A else None
    values = [("flat", "yes" if flat else "no"), ("torsion_free", {True: "yes", False: "no", None: "n/a"}[tf])]
    if qname is not None:
        W = _qla_or_report(defn, qname, rep)
        if W is None:
            return rep, values
        for i in c.bundle.names:
            e = c.bundle.basis(i)
            sq = nabla(c, W.q, nabla(c, W.q, e))
            r = sq - Fraction(1, 2) * curvature(c, W.q, W.q, e)
            rep.add("nabla_q^2 = 1/2 R(q,q)", r.is_zero(), r, f"e = {i}")
            if flat:
                rep.add("flat => nabla_q^2 = 0", sq.is_zero(), sq, f"e = {i}")
        if tf:
            r = nabla(c, W.q, BundleSection(c.bundle, 1, W.q.components))
            rep.add("torsion-free => nabla_q q = 0", r.is_zero(), r)
    elif not rep.results:
        rep.notes.append("no --q given; only flatness and torsion were classified")
    return rep, values


@main.command()
@click.argument("path")
@click.option("--seed", default=DEFAULT_SEED, show_default=True, type=int)
@click.option("--degree", default=DEFAULT_DEGREE, show_default=True, type=click.IntRange(0, 6))
@click.option("--cases", default=100, show_default=True, type=click.IntRange(1, 10000))
@command
def properties(path, seed, degree, cases):
    """Run the full randomized invariant suite (reproducible from the seed)."""
    from qla.properties import run_all

    defn = load(path)
    rep = run_all(defn, seed=seed, degree=degree, cases=cases)
    return rep, [("seed", str(seed)), ("degree", str(degree)), ("cases", str(cases))]


if __name__ == "__main__":  # pragma: no cover
    main()
