from __future__ import annotations

import pytest
from hypothesis import strategies as st

from qla.fileformat import load_fixture
from qla.gpoly import Coord, GradedPoly, SuperChart

CHART = SuperChart([Coord("x", 0), Coord("y", 0), Coord("theta", 1), Coord("eta", 1), Coord("zeta", 1)])


@st.composite
def polys(draw, chart=CHART, parity=None, max_terms=4, max_exp=2):
    """Random GradedPoly over ``chart``; ``parity`` restricts to homogeneous ones."""
    ne, no = len(chart.even_names), len(chart.odd_names)
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        exps = tuple(draw(st.integers(0, max_exp)) for _ in range(ne))
        odd = tuple(i for i in range(no) if draw(st.booleans()))
        if parity is not None and len(odd) % 2 != parity:
            continue
        num = draw(st.integers(-5, 5))
        den = draw(st.integers(1, 4))
        if num:
            from fractions import Fraction

            terms[(exps, odd)] = terms.get((exps, odd), 0) + Fraction(num, den)
    return GradedPoly(chart, {k: v for k, v in terms.items() if v})


@pytest.fixture(scope="session")
def gl11():
    return load_fixture("gl1_1")


@pytest.fixture(scope="session")
def susy():
    return load_fixture("susy_action")


@pytest.fixture(scope="session")
def zero_alg():
    return load_fixture("zero")


@pytest.fixture(scope="session")
def tangent():
    return load_fixture("tangent_11")
