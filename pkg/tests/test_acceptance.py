"""Acceptance criteria, exact arithmetic and zero tolerance.

Each test prints a single ``PASS``/``FAIL`` line (run with ``pytest -s`` to see them,
or execute this file directly). Randomized parts use a fixed seed.
"""

from __future__ import annotations

import random
import time

from click.testing import CliRunner

from qla.algebroid import build_Q, homological_residual
from qla.cli import main
from qla.fileformat import build_morphism, load_fixture, load_morphism_file, loads
from qla.gpoly import parse
from qla.homsec import QLA, bicomplex_apply
from qla.morphism import is_qla_morphism
from qla.properties import (
    connection_suite,
    derived_bracket_suite,
    loday_suite,
    modular_suite,
    morphism_suite,
    qalgebroid_suite,
)
from qla.report import Report

SEED = 20200

# fixture name -> homological sections used as q
FIXTURES = {
    "gl1_1": ["psi_plus", "psi_minus"],
    "susy_action": ["theta_q", "theta_x"],
    "zero": ["any_odd"],
    "tangent_11": ["Qq", "Qx"],
}


def _verdict(number: int, title: str, failures: list[str], started: float) -> None:
    elapsed = time.perf_counter() - started
    status = "PASS" if not failures else "FAIL"
    print(f"{status} criterion {number}: {title} ({elapsed:.1f} s)")
    for f in failures:
        print(f"    {f}")
    assert not failures, "\n".join(failures)
    assert elapsed < 60, f"criterion {number} took {elapsed:.1f} s"


def _collect(failures: list[str], label: str, rep: Report) -> None:
    for r in rep.results:
        if not r.passed:
            failures.append(f"{label}: {r.check} @ {r.location} residual {r.residual}")


def _pool(defn, names):
    return [defn.section(n) for n in names]


def _run(*args):
    return CliRunner().invoke(main, list(args))


def test_criterion_1_fixtures_are_lie_algebroids():
    t0 = time.perf_counter()
    failures = []
    for name in FIXTURES:
        r = _run("check", f"{name}.qla")
        if r.exit_code != 0:
            failures.append(f"check {name}: exit {r.exit_code}")
    susy = load_fixture("susy_action").data
    expected = "(xi + 1/2*theta*z)*d/dx + (z)*d/dtheta + (-1/2*z^2)*d/dxi"
    got = str(build_Q(susy))
    if got != expected:
        failures.append(f"SUSY Q = {got}, expected {expected}")
    _verdict(1, "fixtures satisfy Q^2 = 0; SUSY Q reproduced", failures, t0)


def test_criterion_2_homological_section_table():
    t0 = time.perf_counter()
    failures = []
    for sec in ("psi_plus", "psi_minus"):
        if _run("homological", "gl1_1.qla", "--section", sec).exit_code != 0:
            failures.append(f"gl1_1 {sec} should be homological")
    susy = load_fixture("susy_action")
    for q in ("x", "x^2 + 1", "3*x^3 - 1/2", "1", "x^4 + x"):
        res = homological_residual(susy.data.section(1, {"t": f"theta*({q})"}))
        if not res.is_zero():
            failures.append(f"theta*({q}) t: residual {res}")
    r = _run("homological", "susy_action.qla", "--section", "tau", "--format", "json")
    if r.exit_code != 1 or '"residual": "(1/2)*t"' not in r.output:
        failures.append(f"tau: exit {r.exit_code}, output {r.output!r}")
    _verdict(2, "homological-section table", failures, t0)


def test_criterion_3_derived_bracket_equivalence():
    t0 = time.perf_counter()
    failures = []
    rng = random.Random(SEED)
    for name in FIXTURES:
        _collect(failures, name, derived_bracket_suite(load_fixture(name).data, rng, cases=100, degree=3))
    _verdict(3, "local bracket/anchor = derived bracket/anchor (100 cases per fixture)", failures, t0)


def test_criterion_4_loday_suite():
    t0 = time.perf_counter()
    failures = []
    rng = random.Random(SEED)
    for name, qs in FIXTURES.items():
        defn = load_fixture(name)
        _collect(failures, name, loday_suite(defn.data, _pool(defn, qs), rng, cases=100, degree=3))
    _verdict(4, "Loday-Jacobi, anomaly, Leibniz rules, rho_L, centrality of q", failures, t0)


def test_criterion_5_q_algebroid_and_bicomplex():
    t0 = time.perf_counter()
    failures = []
    rng = random.Random(SEED)
    for name, qs in FIXTURES.items():
        defn = load_fixture(name)
        _collect(failures, name, qalgebroid_suite(defn.data, _pool(defn, qs), rng, cases=20))
    susy = load_fixture("susy_action")
    pc = susy.data.pi_chart
    for qx in ("x", "x^2 + 1", "3*x^3 - 1/2"):
        W = QLA(susy.data, susy.data.section(1, {"t": f"theta*({qx})"}))
        for p in range(5):
            for omega in ("1", "x", "x^3 - 2*x"):
                form = parse(f"z^{p}*theta*({omega})", pc)
                out = bicomplex_apply(W, form, "Lq")
                if not out.is_zero():
                    failures.append(f"L_q(z^{p} theta ({omega})) = {out} for q = theta({qx})")
    _verdict(5, "Q-algebroid identities; SUSY forms are L_q-closed", failures, t0)


SCALING = """
[chart]
x     even
theta odd

[fiber]
e    even  u
psi  odd   w

[anchor]
e x = x

[brackets]
e psi -> psi = 2
"""


def test_criterion_6_modular_suite():
    t0 = time.perf_counter()
    failures = []
    rng = random.Random(SEED)
    for name, qs in FIXTURES.items():
        defn = load_fixture(name)
        _collect(failures, name, modular_suite(defn.data, _pool(defn, qs), rng, cases=100, degree=3))
    scaling = loads(SCALING).data  # not unimodular: phi_Q = -u
    _collect(failures, "scaling", modular_suite(scaling, [scaling.zero_section()], rng, cases=100, degree=3))
    _verdict(6, "modular representatives and divergence identities", failures, t0)


def test_criterion_7_morphism_suite():
    t0 = time.perf_counter()
    failures = []
    rng = random.Random(SEED)
    for name, qs in FIXTURES.items():
        defn = load_fixture(name)
        _collect(failures, name, morphism_suite(defn.data, _pool(defn, qs), rng, cases=50, degree=3))
    susy = load_fixture("susy_action")
    for path, should_pass in (("susy_anchor.map", True), ("susy_bad.map", False)):
        spec = load_morphism_file(path)
        target = load_fixture(spec.target)
        m = build_morphism(spec, susy, target)
        rep = is_qla_morphism(
            QLA(susy.data, susy.section(spec.source_q)), QLA(target.data, target.section(spec.target_q)), m
        )
        if rep.passed != should_pass:
            failures.append(f"{path}: passed = {rep.passed}")
        if not should_pass and any(r.residual in ("", "0") for r in rep.results if not r.passed):
            failures.append(f"{path}: failing check without a residual")
    _verdict(7, "identity/anchor/change-of-basis morphisms; Phi-relation violation detected", failures, t0)


def test_criterion_8_connection_suite():
    t0 = time.perf_counter()
    failures = []
    rng = random.Random(SEED)
    for name, qs in FIXTURES.items():
        defn = load_fixture(name)
        pool = _pool(defn, qs)
        extra = [(b, c, pool[0]) for b, c in sorted(defn.connections.items())]
        _collect(failures, name, connection_suite(defn.data, pool, rng, cases=100, extra=extra))
    _verdict(8, "connection axioms, curvature, torsion, nabla_q", failures, t0)


def test_criterion_9_almost_lie_mode():
    t0 = time.perf_counter()
    failures = []
    for name in ("almost_jacobi.qla", "almost_jacobi_11.qla"):
        almost = _run("check", name, "--mode", "almost")
        lie = _run("check", name, "--mode", "lie")
        if almost.exit_code != 0:
            failures.append(f"{name} --mode almost: exit {almost.exit_code}")
        if lie.exit_code != 1:
            failures.append(f"{name} --mode lie: exit {lie.exit_code}")
    _verdict(9, "Jacobi-violating example passes almost mode, fails lie mode", failures, t0)


if __name__ == "__main__":
    import sys

    ok = True
    for fn_name, fn in sorted(globals().items()):
        if fn_name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                ok = False
    sys.exit(0 if ok else 1)
