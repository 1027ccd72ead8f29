import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import cyc_elts
from modcurves.eisenstein import level1_series
from modcurves.numtower import CycElt
from modcurves.qseries import (
    PrecisionError, QSeries, dump_series, echelon_basis, load_series, series_arith,
    series_eval_float, series_substitute,
)

PROPS = settings(max_examples=120, deadline=None)

f = QSeries([1, 0, 0, 60, -120], prec=5)
g = QSeries([1, 0, 6, -9], val=1, prec=4)
h = QSeries([1, -4, 12], val=2, prec=3)


def test_monomial_shift():
    s = QSeries([1, 744], val=-1)
    assert s * QSeries.monomial(1, 1) == QSeries([1, 744])


def test_geometric_series():
    inv = series_arith(QSeries([1, -1], prec=10), None, "invert")
    assert inv == QSeries([1] * 10, prec=10)
    with pytest.raises(ZeroDivisionError):
        QSeries.zero(5).invert()


def test_fg_product():
    fg = f * g
    assert fg.val == 1 and fg.abs_prec == 5
    assert [fg.coeff(e) for e in range(1, 5)] == [1, 0, 6, 51]


def test_precision_tracking():
    a = QSeries([1, 2, 3], prec=3)
    b = QSeries([5], val=2, prec=1)
    assert (a * b).abs_prec == 3
    assert (a + QSeries([1], val=1, prec=5)).abs_prec == 3
    # exact times truncated keeps the truncated relative precision
    assert (QSeries([1, 1]) * a).prec == 3
    assert (a - a).is_zero() and (a - a).abs_prec == 3


def test_substitute_examples():
    s = QSeries([1, 744], val=-1)
    assert series_substitute(s, 2, 0, 1) == QSeries([1, 0, 744], val=-2)
    half = series_substitute(QSeries([1], val=-1), 1, 1, 2)
    assert half.den == 2 and half.val == -1 and half.lead() == CycElt.rational(2, -1)


def test_substitute_matches_j_numerically():
    j = level1_series("j", 40)
    jh = series_substitute(j, 1, 0, 2)
    assert abs(series_eval_float(jh, 2j) - series_eval_float(j, 1j)) < 1e-6 * abs(series_eval_float(j, 1j))


def test_eval():
    assert series_eval_float(QSeries([1], prec=3), 0.3 + 0.7j) == 1
    assert abs(series_eval_float(QSeries.monomial(1, 1), 1j) - math.exp(-2 * math.pi)) < 1e-15
    j = level1_series("j", 30)
    assert abs(series_eval_float(j.truncate(20), 2j) - series_eval_float(j, 2j)) < 1e-10
    with pytest.raises(ValueError):
        series_eval_float(j, -1j)


def test_echelon_examples():
    basis, rel = echelon_basis([QSeries([1, 1], prec=4), QSeries([0, 1], prec=4)])
    assert [b.val for b in basis] == [0, 1] and rel == []
    basis, rel = echelon_basis([f, g, f + g])
    assert len(basis) == 2 and len(rel) == 1
    v = rel[0]
    assert v[0] == v[1] == -v[2]
    prods = [f * f, f * g, f * h, g * g, g * h, h * h]
    basis, rel = echelon_basis(prods)
    assert len(basis) == 5 and len(rel) == 1


def test_echelon_window_error():
    with pytest.raises(PrecisionError):
        echelon_basis([QSeries([1], prec=3), QSeries([1], val=3, prec=2)], min_window=10)


def test_file_round_trip():
    w = QSeries([CycElt.zeta(5), Fraction(1, 3)], val=-2, den=5, prec=7, level=5, twopii=1)
    text = dump_series([("f", f), ("w", w), ("z", QSeries.zero(4, den=5, level=5))], {"level": 5})
    named, header = load_series(text)
    assert header == {"level": "5"}
    assert [n for n, _ in named] == ["f", "w", "z"]
    assert named[0][1] == f and named[1][1] == w and named[2][1] == QSeries.zero(4, den=5, level=5)
    assert dump_series(named, header) == text


def test_file_errors():
    with pytest.raises(ValueError):
        load_series("SERIES f N=1 VAL=0 PREC=2\n0/1 : 1\n")
    with pytest.raises(ValueError):
        load_series("SERIES f N=1 VAL=0 PREC=2\n0/2 : 1\nEND\n")


@st.composite
def series(draw, den=None, level=5):
    den = den or draw(st.sampled_from([1, 2, 5]))
    n = draw(st.integers(1, 6))
    cs = draw(st.lists(cyc_elts(level), min_size=n, max_size=n))
    val = draw(st.integers(-3, 3))
    prec = draw(st.one_of(st.none(), st.integers(n, n + 3)))
    return QSeries(cs, val=val, den=den, prec=prec, level=level)


def _agree(a, b):
    """Equal on the exponents both sides know."""
    lo = min(a.val if a.coeffs else 10**6, b.val if b.coeffs else 10**6)
    hi = min(x for x in (a.abs_prec, b.abs_prec, lo + 12) if x is not None)
    return all(a.coeff(e) == b.coeff(e) for e in range(lo, hi))


@PROPS
@given(series(den=5), series(den=5), series(den=5))
def test_ring_axioms(a, b, c):
    assert _agree((a + b) + c, a + (b + c))
    assert _agree((a * b) * c, a * (b * c))
    assert _agree(a * (b + c), a * b + a * c)
    assert _agree(a * b, b * a)
    ab = a * b
    if a.prec is not None or b.prec is not None:
        assert ab.prec == min(p for p in (a.prec, b.prec) if p is not None)


@PROPS
@given(series(den=1), series(den=1), st.integers(1, 3), st.integers(0, 4), st.integers(1, 4))
def test_substitution_is_multiplicative(a, b, x, y, d):
    lhs = series_substitute(a * b, x, y, d)
    rhs = series_substitute(a, x, y, d) * series_substitute(b, x, y, d)
    assert _agree(lhs, rhs)
    assert lhs.abs_prec == rhs.abs_prec


@PROPS
@given(series(level=5))
def test_round_trip_property(s):
    named, _ = load_series(dump_series([("s", s)]))
    assert named[0][1] == s
