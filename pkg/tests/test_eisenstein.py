import pytest
from hypothesis import given, settings, strategies as st

from modcurves.eisenstein import (
    DivisorCombo, TorsionLabel, eis_combo, eis_expansion, eis_weight2_diff, lattice_oracle,
    lattice_oracle_combo, lattice_partial_sums, level1_series, weierstrass_p, weierstrass_p_prime,
)
from modcurves.qseries import QSeries, series_eval_float

TAUS = [1.2j, 0.3 + 1.4j, -0.25 + 0.9j]
N = 5
PREC = 12


def close(a, b, tol=1e-8):
    return abs(a - b) <= tol * max(1.0, abs(b))


def test_label_reduction():
    a = TorsionLabel(7, -1, 5)
    assert (a.i, a.j) == (2, 4)
    assert (-a).i == 3 and TorsionLabel(0, 0, 5).is_zero


def test_combo_validation():
    with pytest.raises(ValueError):
        DivisorCombo(5, [((1, 0), 1)])
    with pytest.raises(ValueError):
        DivisorCombo(5, [((1, 0), 1), ((4, 0), 1), ((0, 0), -2)])  # lifts sum to (1, 0)
    D = DivisorCombo(5, [((1, 0), 1), ((-1, 0), 1), ((0, 0), -2)])
    assert len(D.terms) == 3


def test_rejected_weights():
    with pytest.raises(ValueError):
        eis_expansion(2, TorsionLabel(1, 0, 5), 5)
    with pytest.raises(ValueError):
        eis_expansion(1, TorsionLabel(0, 0, 5), 5)
    with pytest.raises(ValueError):
        eis_weight2_diff(TorsionLabel(0, 0, 5), 5)
    with pytest.raises(ValueError):
        lattice_oracle(2, (0.2, 0.0), 1j)
    with pytest.raises(ValueError):
        lattice_oracle(4, (0.2, 0.0), -1j)


def test_odd_weight_at_zero_vanishes():
    assert eis_expansion(3, TorsionLabel(0, 0, 5), PREC).is_zero()
    assert abs(lattice_oracle(3, (0.0, 0.0), 1.1j).value) < 1e-10


def test_parity():
    for k in (1, 3, 4):
        a = TorsionLabel(2, 1, 5)
        s, t = eis_expansion(k, a, PREC), eis_expansion(k, -a, PREC)
        assert t == (s if k % 2 == 0 else -s)
    a = TorsionLabel(1, 3, 5)
    assert eis_weight2_diff(a, PREC) == eis_weight2_diff(-a, PREC)


@pytest.mark.parametrize("k", [3, 4])
@pytest.mark.parametrize("ij", [(1, 0), (0, 1), (2, 3)])
def test_single_vs_oracle(k, ij):
    a = TorsionLabel(*ij, N)
    s = eis_expansion(k, a, PREC)
    for tau in TAUS:
        assert close(series_eval_float(s, tau), lattice_oracle(k, a, tau).value)


def test_k4_example_point():
    a = TorsionLabel(1, 0, 5)
    assert abs(series_eval_float(eis_expansion(4, a, PREC), 1.2j) - lattice_oracle(4, a, 1.2j).value) < 1e-8


def test_weight1_combo_vs_oracle():
    D = DivisorCombo(5, [((1, 0), 1), ((0, 1), 1), ((-1, -1), 1), ((0, 0), -3)])
    s = eis_combo(1, D, PREC)
    assert close(series_eval_float(s, 0.3 + 1.4j), lattice_oracle_combo(1, D, 0.3 + 1.4j).value)


def test_weight2_diff_is_wp():
    a = TorsionLabel(2, 1, 5)
    tau = 1.1j
    z = 2 / 5 + tau / 5
    assert close(series_eval_float(eis_weight2_diff(a, PREC), tau), weierstrass_p(z, tau))
    assert close(series_eval_float(-2 * eis_expansion(3, a, PREC), tau), weierstrass_p_prime(z, tau))


def test_weight2_diff_from_combo():
    a = TorsionLabel(1, 2, 5)
    D = DivisorCombo(5, [((1, 2), 1), ((-1, -2), 1), ((0, 0), -2)])
    assert eis_combo(2, D, PREC) == 2 * eis_weight2_diff(a, PREC)


def test_combo_edge_cases():
    D = DivisorCombo(5, [((1, 0), 1), ((1, 0), -1)])
    assert eis_combo(3, D, PREC).is_zero()
    D1 = DivisorCombo(5, [((1, 0), 1), ((0, 1), 1), ((-1, -1), 1), ((0, 0), -3)])
    D2 = DivisorCombo(5, [((0, 0), -3), ((-1, -1), 1), ((0, 1), 1), ((1, 0), 1)])
    assert eis_combo(1, D1, PREC) == eis_combo(1, D2, PREC)


def test_level1_series():
    j = level1_series("j", 10)
    assert j.val == -1 and [j.coeff(e) for e in (-1, 0, 1, 2)] == [1, 744, 196884, 21493760]
    d = level1_series("Delta", 10)
    assert [d.coeff(e) for e in range(1, 5)] == [1, -24, 252, -1472]
    e4, e6 = level1_series("E4", 10), level1_series("E6", 10)
    assert e4 ** 3 - e6 ** 2 == (d * 1728).truncate(10)


def test_delta_product_oracle():
    # q prod (1 - q^n)^24 by direct multiplication
    s = QSeries([1], val=1)
    for n in range(1, 12):
        s = s * (QSeries([1] + [0] * (n - 1) + [-1]) ** 24)
    assert level1_series("Delta", 12) == s.truncate(12)


def test_oracle_convergence_self_test():
    coarse = lattice_oracle(4, (0.2, 0.4), 0.3 + 1.4j, cutoff=80)
    fine = lattice_oracle(4, (0.2, 0.4), 0.3 + 1.4j, cutoff=160)
    assert abs(fine.value - coarse.value) < coarse.tail


def test_weight2_cutoff_shape():
    tau = 0.3 + 1.4j
    single = [(0.2, 0.0, 1)]
    sq = lattice_partial_sums(2, single, tau, 120, aspect=1)[-1]
    rect = lattice_partial_sums(2, single, tau, 120, aspect=2)[-1]
    assert abs(sq - rect) > 0.1  # the lone G_2 sum depends on the summation shape
    lifts = DivisorCombo(5, [((1, 0), 1), ((-1, 0), 1), ((0, 0), -2)]).lifts()
    sq = lattice_partial_sums(2, lifts, tau, 120, aspect=1)[-1]
    rect = lattice_partial_sums(2, lifts, tau, 120, aspect=2)[-1]
    assert abs(sq - rect) < 1e-3


def test_covariance_spot_check():
    # gamma = (1 0; 5 1) lies in Gamma(5); tau is chosen so gamma tau stays away from the real axis
    a, b, c, d = 1, 0, 5, 1
    tau = -0.2 + 0.25j
    gt = (a * tau + b) / (c * tau + d)
    for k in (3, 4):
        lhs = lattice_oracle(k, (0.2, 0.4), gt).value
        rhs = (c * tau + d) ** k * lattice_oracle(k, (0.2, 0.4), tau).value
        assert abs(lhs - rhs) < 1e-6 * max(1.0, abs(rhs))


combo_terms = st.lists(
    st.tuples(st.tuples(st.integers(-6, 6), st.integers(-6, 6)), st.integers(-3, 3)), min_size=1, max_size=4
)


def _balanced(terms):
    si = sum(m * i for (i, _), m in terms)
    sj = sum(m * j for (_, j), m in terms)
    sm = sum(m for _, m in terms)
    # fix both conditions with two correction terms
    return list(terms) + [((-si, -sj), 1), ((0, 0), -sm - 1)]


@settings(max_examples=120, deadline=None)
@given(combo_terms, combo_terms, st.sampled_from([1, 2, 3]))
def test_combo_linearity(t1, t2, k):
    D1, D2 = DivisorCombo(5, _balanced(t1)), DivisorCombo(5, _balanced(t2))
    assert eis_combo(k, D1 + D2, 4) == eis_combo(k, D1, 4) + eis_combo(k, D2, 4)
