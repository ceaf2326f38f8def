"""Seeded random generators for property checks.

Everything takes an explicit ``random.Random`` so that a seed reproduces a run.
"""

from __future__ import annotations

import random
from fractions import Fraction

from qla.algebroid import AlgebroidData, Section
from qla.gpoly import GradedPoly, SuperChart
from qla.homsec import base_monomials
from qla.schart import VectorField

DEFAULT_SEED = 20200
DEFAULT_DEGREE = 3

_COEFFS = [Fraction(n, d) for n in range(-3, 4) if n for d in (1, 2, 3)]


def random_coeff(rng: random.Random) -> Fraction:
    return rng.choice(_COEFFS)


def random_poly(chart: SuperChart, parity: int, degree: int, rng: random.Random, max_terms: int = 3) -> GradedPoly:
    """Random polynomial of the given parity with at most ``max_terms`` monomials of degree <= ``degree``."""
    pool = [m for m in _monomials(chart, degree) if m.parity() == ("odd" if parity % 2 else "even")]
    if not pool:
        return chart.zero()
    k = rng.randint(1, max_terms)
    out = chart.zero()
    for _ in range(k):
        out = out + rng.choice(pool).scale(random_coeff(rng))
    return out


_MONO_CACHE: dict = {}


def _monomials(chart: SuperChart, degree: int):
    key = (chart, degree)
    if key not in _MONO_CACHE:
        _MONO_CACHE[key] = base_monomials(chart, degree)
    return _MONO_CACHE[key]


def random_section(data: AlgebroidData, parity: int, degree: int, rng: random.Random, density: float = 0.7) -> Section:
    comps = {}
    for a in data.fiber_names:
        if rng.random() < density:
            comps[a] = random_poly(data.base_chart, parity + data.parity(a), degree, rng)
    return Section(data, parity, comps)


def random_function(chart: SuperChart, degree: int, rng: random.Random, parity: int | None = None) -> GradedPoly:
    if parity is None:
        parity = rng.randint(0, 1)
    return random_poly(chart, parity, degree, rng)


def random_vector_field(chart: SuperChart, parity: int, degree: int, rng: random.Random, density: float = 0.7) -> VectorField:
    comps = {}
    for c in chart:
        if rng.random() < density:
            comps[c.name] = random_poly(chart, parity + c.parity, degree, rng)
    return VectorField(chart, parity, comps)


def random_basis_change(data: AlgebroidData, rng: random.Random, degree: int = 2) -> dict:
    """Random invertible T: constant invertible even blocks plus entries that are nilpotent.

    Off-parity entries are odd functions, hence nilpotent, so the inverse is polynomial.
    """
    chart = data.base_chart
    names = data.fiber_names
    T = {}
    for i, b in enumerate(names):
        for j, a in enumerate(names):
            pb, pa = data.parity(b), data.parity(a)
            if pb == pa:
                if i == j:
                    T[(b, a)] = chart.const(rng.choice([1, 2, -1, Fraction(1, 2), 3]))
                elif i < j and rng.random() < 0.5:
                    T[(b, a)] = chart.const(random_coeff(rng))
            elif chart.odd_names and rng.random() < 0.7:
                T[(b, a)] = random_poly(chart, 1, degree, rng, max_terms=2)
    return T


def random_gamma(data: AlgebroidData, bundle, rng: random.Random, degree: int = 2) -> dict:
    chart = data.base_chart
    gamma = {}
    for al in data.fiber_names:
        for i in bundle.names:
            for j in bundle.names:
                if rng.random() < 0.6:
                    p = data.parity(al) + bundle.parity(i) + bundle.parity(j)
                    val = random_poly(chart, p, degree, rng, max_terms=2)
                    if val:
                        gamma[(j, al, i)] = val
    return gamma
