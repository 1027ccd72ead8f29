from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import strategies as st

from modcurves.numtower import CycElt, euler_phi

FIXTURES = Path(__file__).parent / "fixtures"

small_rat = st.fractions(min_value=-20, max_value=20, max_denominator=12)


@st.composite
def cyc_elts(draw, level=None, nonzero=False):
    N = level if level is not None else draw(st.sampled_from([1, 3, 4, 5, 6, 7, 8, 12]))
    coeffs = draw(st.lists(small_rat, min_size=euler_phi(N), max_size=euler_phi(N)))
    x = CycElt(N, coeffs)
    if nonzero and not x:
        x = x + 1
    return x


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


def frac_rows(matrix):
    return [[Fraction(v) for v in row] for row in matrix]


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
