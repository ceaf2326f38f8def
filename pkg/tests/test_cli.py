from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from qla.cli import main
from qla.fileformat import DefinitionError, load_fixture, loads


def run(*args):
    return CliRunner().invoke(main, list(args))


def records(result):
    return [json.loads(line) for line in result.output.splitlines() if line.strip()]


# --- file format ---------------------------------------------------------------------


def test_gl11_fixture_loads():
    d = load_fixture("gl1_1").data
    parities = sorted(d.parity(a) for a in d.fiber_names)
    assert parities == [0, 0, 1, 1]
    assert d.base_chart.names == ()


@pytest.mark.parametrize(
    "text, line, field",
    [
        ("[chart]\nx weird\n", 2, "chart"),
        ("[chart]\nx even\n\n[fiber]\nt even xi\n\n[anchor]\nt x = x^-1\n", 8, "anchor"),
        ("[chart]\nx even\n[fiber]\nt even xi\n[brackets]\nt t -> s = 1\n", 6, "brackets"),
        ("[bogus]\n", 1, None),
    ],
)
def test_definition_errors_carry_line_numbers(text, line, field):
    with pytest.raises(DefinitionError) as info:
        loads(text)
    assert info.value.line == line
    assert info.value.field == field
    assert f"<string>:{line}" in str(info.value)


def test_definition_file_round_trip_of_sections():
    defn = loads("[chart]\nx even\ntheta odd\n[fiber]\nt even xi\n[sections]\nq odd: t = theta*x\n")
    q = defn.section("q")
    assert q.parity == 1 and str(q.component("t")) == "x*theta"
    with pytest.raises(DefinitionError, match="no section named 'missing'"):
        defn.section("missing")


# --- exit codes ----------------------------------------------------------------------


def test_check_passes_on_susy():
    r = run("check", "susy_action.qla")
    assert r.exit_code == 0, r.output
    assert "Q = " in r.output and "PASS" in r.output


def test_check_gl11_fixture():
    r = run("check", "gl1_1.qla")
    assert r.exit_code == 0
    assert "xi_N" in r.output and "zeta_p" in r.output


def test_bad_symmetry_is_an_input_error():
    r = run("check", "bad_symmetry.qla")
    assert r.exit_code == 2
    assert "graded symmetry" in r.output and "alpha=t" in r.output


def test_missing_file_is_an_input_error(tmp_path):
    r = run("check", str(tmp_path / "nope.qla"))
    assert r.exit_code == 2


def test_non_homological_section_fails_with_residual():
    r = run("homological", "susy_action.qla", "--section", "tau", "--format", "json")
    assert r.exit_code == 1
    recs = records(r)
    failing = [x for x in recs if x["status"] == "fail" and x["location"] != "summary"]
    assert failing[0]["residual"] == "(1/2)*t"


def test_even_section_rejected_by_homological():
    r = run("homological", "susy_action.qla", "--section", "t")
    assert r.exit_code == 2


def test_almost_mode_on_almost_lie_example():
    assert run("check", "almost_jacobi.qla", "--mode", "almost").exit_code == 0
    r = run("check", "almost_jacobi.qla", "--mode", "lie")
    assert r.exit_code == 1
    assert "FAIL" in r.output


def test_bracket_and_derived_bracket():
    r = run("bracket", "susy_action.qla", "--left", "tau", "--right", "tau")
    assert r.exit_code == 0 and "[tau,tau] = (1)*t" in r.output
    r = run("derived-bracket", "gl1_1.qla", "--left", "N", "--right", "psi_minus", "--q", "psi_plus")
    # delta N = [psi_p, N] = -2 psi_p, and [-2 psi_p, psi_m] = -2 Z
    assert r.exit_code == 0, r.output
    assert "(N,psi_minus) = (-2)*Z" in r.output


def test_lie_derivative_command():
    r = run("lie-derivative", "susy_action.qla", "--section", "theta_q")
    assert r.exit_code == 0, r.output


def test_modular_output():
    r = run("modular", "susy_action.qla", "--q", "theta_q")
    assert r.exit_code == 0
    assert "phi_Q = 0" in r.output and "phi_q = 0" in r.output
    r = run("modular", "susy_action.qla", "--q", "theta_q", "--sigma", "x^2")
    assert r.exit_code == 0 and "sigma = x^2" in r.output
    assert run("modular", "susy_action.qla", "--sigma", "theta").exit_code == 2


def test_bicomplex_command():
    r = run("bicomplex", "susy_action.qla", "--q", "theta_q", "--degree", "2")
    assert r.exit_code == 0, r.output


def test_morphism_commands():
    ok = run("morphism", "susy_action.qla", "--target", "tangent_11.qla", "--map", "susy_anchor.map")
    assert ok.exit_code == 0, ok.output
    bad = run("morphism", "susy_action.qla", "--target", "tangent_11.qla", "--map", "susy_bad.map", "--format", "json")
    assert bad.exit_code == 1
    failing = [x for x in records(bad) if x["status"] == "fail" and x["location"] != "summary"]
    assert failing and all(x["residual"] not in ("", "0") for x in failing)


def test_connection_check_command():
    r = run("connection-check", "gl1_1.qla", "--bundle", "adj", "--q", "psi_plus")
    assert r.exit_code == 0, r.output
    assert run("connection-check", "gl1_1.qla", "--bundle", "nope").exit_code == 2


def test_json_records_have_required_fields():
    r = run("check", "susy_action.qla", "--format", "json")
    recs = records(r)
    assert recs
    for rec in recs:
        assert {"check", "status", "residual", "location"} <= set(rec)
    assert recs[-1]["location"] == "summary" and recs[-1]["status"] == "pass"


def test_output_is_deterministic():
    a = run("properties", "gl1_1.qla", "--cases", "5")
    b = run("properties", "gl1_1.qla", "--cases", "5")
    assert a.output == b.output
    assert "seed = 20200" in a.output


def test_properties_seed_is_reported():
    r = run("properties", "zero.qla", "--cases", "4", "--seed", "7", "--format", "json")
    assert r.exit_code == 0
    assert any(x.get("value") == "seed = 7" for x in records(r))
