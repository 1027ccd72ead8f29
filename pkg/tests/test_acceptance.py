"""Acceptance criteria 1-10, one test each.

Every test records a one-line PASS/FAIL verdict; the lines are printed in
the pytest terminal summary and by ``python3 tests/test_acceptance.py``.
"""

import random
import time
from contextlib import contextmanager
from fractions import Fraction

import pytest

from modcurves.curvemodel import (
    assemble_form_space, cab_model, find_relations, gamma_n_invariants, laurent_to_series,
    quadric_relations, verify_relations,
)
from modcurves.eisenstein import (
    DivisorCombo, TorsionLabel, eis_combo, eis_expansion, eis_weight2_diff, lattice_oracle,
    lattice_oracle_combo, weierstrass_p, weierstrass_p_prime,
)
from modcurves.katz import (
    EllCurveQ, PointDivisor, formal_weierstrass_expansion, katz_coefficients, numeric_period_bridge,
    slope_identities,
)
from modcurves.modpoly import coset_identity_residual, modpoly_verify, modular_polynomial
from modcurves.qseries import series_eval_float

RESULTS: dict[int, str] = {}
TAUS = [1.2j, 0.3 + 1.4j, -0.25 + 0.9j]


@contextmanager
def criterion(n: int, title: str):
    start = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        RESULTS[n] = f"criterion {n:2d} FAIL  {title} ({type(exc).__name__}: {exc})"
        raise
    RESULTS[n] = f"criterion {n:2d} PASS  {title} [{time.perf_counter() - start:.2f} s]"


def test_c01_phi2_two_way():
    with criterion(1, "Phi_2 qexp == interp, coset identity exact to 30 terms, < 10 s"):
        t0 = time.perf_counter()
        P = modular_polynomial(2, "qexp")
        Q = modular_polynomial(2, "interp")
        assert P.coeffs == Q.coeffs
        res = coset_identity_residual(P, 30)
        assert all(r.is_zero() and r.abs_prec >= 30 for r in res)
        assert time.perf_counter() - t0 < 10


def test_c02_vanishing():
    with criterion(2, "Phi_N(j, j(N tau)) = 0, symmetry, integrality for N in (2, 3, 5), N=5 < 120 s"):
        for N in (2, 3, 5):
            t0 = time.perf_counter()
            rep = modpoly_verify(modular_polynomial(N), 30)
            assert rep["checks"]["vanishing"] and rep["checks"]["symmetry"] and rep["checks"]["integrality"], N
            assert time.perf_counter() - t0 < 120


def test_c03_x15_conic(fixtures_dir):
    with criterion(3, "X_1(5): exactly g^2 - fh - 4gh - 16h^2, < 1 s"):
        t0 = time.perf_counter()
        S = assemble_form_space(0, 0, source="file", path=str(fixtures_dir / "x15.qexp"))
        ideal = quadric_relations(S)
        assert S.names == ["f", "g", "h"]
        assert [t for _, t in ideal.relations] == [{(0, 2, 0): 1, (1, 0, 1): -1, (0, 1, 1): -4, (0, 0, 2): -16}]
        assert time.perf_counter() - t0 < 1


def test_c04_elliptic_quadrics():
    with criterion(4, "L(4O) of y^2 = x^3 + 3141x + 5926: the two quadrics, < 1 s"):
        t0 = time.perf_counter()
        F = formal_weierstrass_expansion(EllCurveQ(3141, 5926), prec=14)
        x, y = F.xz, F.yz
        basis = [laurent_to_series(s) for s in (x**0, x, y, x * x)]
        ideal = find_relations(basis, 2, 8, -8, ["s0", "s1", "s2", "s3"])
        rels = sorted((sorted(t.items()) for _, t in ideal.relations))
        want = sorted([
            sorted({(0, 2, 0, 0): 1, (1, 0, 0, 1): -1}.items()),
            sorted({(0, 0, 2, 0): 1, (0, 1, 0, 1): -1, (1, 1, 0, 0): -3141, (2, 0, 0, 0): -5926}.items()),
        ])
        assert rels == want
        assert time.perf_counter() - t0 < 1


def test_c05_eisenstein_certification():
    with criterion(5, "N=5 expansions (k=1 combos, weight-2 differences, k=3,4 singles) vs lattice oracle to 1e-8"):
        N, prec = 5, 16
        labels = [TorsionLabel(i, j, N) for i in range(N) for j in range(N)]
        worst = 0.0
        for k in (3, 4):
            for a in labels:
                s = eis_expansion(k, a, prec)
                for tau in TAUS:
                    worst = max(worst, abs(series_eval_float(s, tau) - lattice_oracle(k, a, tau).value))
        for a in labels[1:]:
            D = DivisorCombo(N, [((a.i, a.j), 1), ((-a.i, -a.j), 1), ((0, 0), -2)])
            s = eis_weight2_diff(a, prec)
            for tau in TAUS:
                worst = max(worst, abs(2 * series_eval_float(s, tau) - lattice_oracle_combo(2, D, tau).value))
        # one [alpha] + [beta] + [gamma] - 3[0] combination per nonzero alpha
        for a in labels[1:]:
            b = TorsionLabel(a.j + 1, a.i + 2, N)
            if b.is_zero or (a + b).is_zero:
                b = TorsionLabel(a.i + 1, a.j, N)
            D = DivisorCombo(N, [((a.i, a.j), 1), ((b.i, b.j), 1), ((-a.i - b.i, -a.j - b.j), 1), ((0, 0), -3)])
            s = eis_combo(1, D, prec)
            for tau in TAUS:
                worst = max(worst, abs(series_eval_float(s, tau) - lattice_oracle_combo(1, D, tau).value))
        assert worst < 1e-8, worst


def test_c06_katz_bridge():
    with criterion(6, "g_{k,D} = -G_{k,D} for k=1,2,3, three 5-torsion divisors, two tau, to 1e-6"):
        divisors = [
            [((1, 0), 1), ((0, 1), 1), ((-1, -1), 1), ((0, 0), -3)],
            [((1, 2), 1), ((-1, -2), 1), ((0, 0), -2)],
            [((1, 0), 1), ((0, 2), 1), ((2, 1), -1), ((-1, 1), -1)],
        ]
        N = 5
        worst = 0.0
        for tau in (1.2j, 0.3 + 1.4j):
            E, table = numeric_period_bridge(tau, N)
            for terms in divisors:
                Dc = DivisorCombo(N, terms)
                D = PointDivisor(E, [(table[(i % N, j % N)], m) for (i, j), m in terms])
                _, g = katz_coefficients(E, D, 3)
                for k in (1, 2, 3):
                    G = lattice_oracle_combo(k, Dc, tau).value
                    worst = max(worst, abs(g[k - 1] + G))
        assert worst < 1e-6, worst


def test_c07_addition_law():
    with criterion(7, "lambda^2 = x_a + x_b + x_g exactly on 100 random pairs; p and p' vs G_2 diff and -2 G_3 to 1e-8"):
        rnd = random.Random(20261016)
        done = 0
        while done < 100:
            x0, x1 = rnd.sample(range(-6, 7), 2)
            y0, y1 = rnd.choice([-5, -3, -1, 1, 2, 4]), rnd.choice([-4, -2, 1, 3, 5])
            a = Fraction(y1 * y1 - x1**3 - y0 * y0 + x0**3, x1 - x0)
            b = y0 * y0 - x0**3 - a * x0
            if 4 * a**3 + 27 * b * b == 0:
                continue
            E = EllCurveQ(a, b)
            P, Q = E.point(x0, y0), E.point(x1, y1)
            if E.add(P, Q).is_origin:
                continue
            rep = slope_identities(E, P, Q)
            assert rep["lambda_sq"] == rep["x_sum"] and isinstance(rep["lambda_sq"], Fraction)
            done += 1
        worst = 0.0
        for tau in TAUS:
            for i in range(5):
                for j in range(5):
                    if i == j == 0:
                        continue
                    a = TorsionLabel(i, j, 5)
                    z = i / 5 + j * tau / 5
                    worst = max(worst, abs(series_eval_float(eis_weight2_diff(a, 16), tau) - weierstrass_p(z, tau)))
                    worst = max(worst, abs(-2 * series_eval_float(eis_expansion(3, a, 16), tau)
                                           - weierstrass_p_prime(z, tau)))
        assert worst < 1e-8, worst


def test_c08_numerology():
    with criterion(8, "Gamma(N) numerology for N=5,7, 2g-2 = 2 degL1 - c on 3..20, Gamma(5) weight-2 rank 11"):
        d5, d7 = gamma_n_invariants(5), gamma_n_invariants(7)
        assert (d5.degree, d5.cusps, d5.degL1, d5.genus) == (60, 12, 5, 0)
        assert (d7.degree, d7.cusps, d7.degL1, d7.genus) == (168, 24, 14, 3)
        for N in range(3, 21):
            d = gamma_n_invariants(N)
            assert 2 * d.genus - 2 == 2 * d.degL1 - d.cusps
        S = assemble_form_space(5, 2)
        assert S.achieved_rank == 11 == 2 * d5.degL1 + 1 - d5.genus


def test_c09_cab():
    with criterion(9, "C_{3,4}: genus 3 by gaps, dim L(kP0) = k-2 on 5..15, k=8 quadric-generated, k=6,7 re-verified"):
        C = {(1, 0): 1, (0, 0): 2}
        assert cab_model(3, 4, C, 5, max_degree=1)["genus"] == 3
        assert [cab_model(3, 4, C, k, max_degree=1)["dim"] for k in range(5, 16)] == list(range(3, 14))
        for k in (6, 7, 8):
            M = cab_model(3, 4, C, k)
            assert M["verification"]["passed"]
            assert verify_relations(M["ideal"], M["series"])["passed"]
            if k == 8:
                assert M["generation"][3]["new_generators"] == 0


def test_c10_property_suites():
    import test_eisenstein
    import test_katz
    import test_numtower
    import test_qseries

    with criterion(10, "property suites (field, ring, substitution, combo linearity, katz order) at >= 100 cases each"):
        suites = [
            test_numtower.test_field_axioms, test_numtower.test_galois_is_ring_hom,
            test_qseries.test_ring_axioms, test_qseries.test_substitution_is_multiplicative,
            test_eisenstein.test_combo_linearity, test_katz.test_katz_order_invariance,
        ]
        for fn in suites:
            assert fn.hypothesis.inner_test and fn._hypothesis_internal_use_settings.max_examples >= 100
            fn()


def summary_lines() -> list[str]:
    return [RESULTS[n] for n in sorted(RESULTS)]


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
