import json
import random
from fractions import Fraction

import pytest

from modcurves.curvemodel import (
    FormSpace, ModelIdeal, assemble_form_space, cab_expansion, cab_model, find_relations,
    gamma1_invariants, gamma_n_invariants, laurent_to_series, point_representation,
    quadric_relations, relations_of_degree, restrict_vanishing, verify_relations,
)
from modcurves.katz import EllCurveQ, formal_weierstrass_expansion
from modcurves.qseries import PrecisionError

C34 = {(1, 0): 1, (0, 0): 2}  # y^3 = x^4 + x + 2


@pytest.fixture(scope="module")
def x15(fixtures_dir):
    return assemble_form_space(0, 0, source="file", path=str(fixtures_dir / "x15.qexp"))


def test_gamma_numerology():
    d5 = gamma_n_invariants(5)
    assert (d5.index, d5.degree, d5.cusps, d5.degL1, d5.genus) == (120, 60, 12, 5, 0)
    d7 = gamma_n_invariants(7)
    assert (d7.degree, d7.cusps, d7.degL1, d7.genus) == (168, 24, 14, 3)
    for N in range(3, 21):
        d = gamma_n_invariants(N)
        assert 2 * d.genus - 2 == 2 * d.degL1 - d.cusps
    with pytest.raises(ValueError):
        gamma_n_invariants(2)


def test_gamma1_numerology():
    assert (gamma1_invariants(5).genus, gamma1_invariants(5).cusps) == (0, 4)
    d = gamma1_invariants(11)
    assert (d.degree, d.cusps, d.degL1, d.genus) == (60, 10, 5, 1)
    assert gamma1_invariants(13).genus == 2
    with pytest.raises(ValueError):
        gamma1_invariants(4)


def test_file_space(x15, fixtures_dir):
    assert x15.names == ["f", "g", "h"]
    assert [s.val for s in x15.series] == [0, 1, 2]
    assert x15.claimed_dim == x15.achieved_rank == 3
    text = (fixtures_dir / "x15.qexp").read_text()
    again = assemble_form_space(0, 0, source="file", text=x15.to_text())
    assert [s for s in again.series] == x15.series
    assert "# group: Gamma1" in text


def test_file_errors(tmp_path):
    bad = tmp_path / "bad.qexp"
    bad.write_text("SERIES f N=1 VAL=0 PREC=2\n0/1 : one\nEND\n")
    with pytest.raises(ValueError):
        assemble_form_space(0, 0, source="file", path=str(bad))
    with pytest.raises(ValueError):
        assemble_form_space(5, 2, source="nowhere")


def test_x15_conic(x15):
    ideal = quadric_relations(x15)
    assert len(ideal.relations) == 1
    deg, terms = ideal.relations[0]
    # g^2 - f h - 4 g h - 16 h^2 in exponent vectors over (f, g, h)
    assert terms == {(0, 2, 0): 1, (1, 0, 1): -1, (0, 1, 1): -4, (0, 0, 2): -16}
    assert verify_relations(ideal, x15.series)["passed"]
    assert ideal.pretty() == ["(1)*g^2 + (-1)*f*h + (-4)*g*h + (-16)*h^2 = 0"]


def test_precision_audit(x15):
    short = FormSpace("Gamma1", 5, 2, [(n, s.truncate(4)) for n, s in x15.basis], 3, 3)
    with pytest.raises(PrecisionError):
        quadric_relations(short)


def test_single_form_has_no_quadrics(x15):
    one = FormSpace("Gamma1", 5, 2, x15.basis[:1], None, 1)
    assert quadric_relations(one).relations == []


def test_eisenstein_gamma1_5_reproduces_basis(x15):
    S = assemble_form_space(5, 2, group="Gamma1", prec=5)
    # Eisenstein products carry a (2 pi i)^2 normalization; the coefficients agree
    assert [(s.val, s.coeffs, s.abs_prec) for s in S.series] == [(s.val, s.coeffs, s.abs_prec) for s in x15.series]


def test_gamma5_rank():
    S = assemble_form_space(5, 2)
    d = gamma_n_invariants(5)
    assert S.achieved_rank == S.claimed_dim == 2 * d.degL1 + 1 - d.genus == 11
    ideal = quadric_relations(S)
    assert len(ideal.relations) == 66 - 21  # Sym^2 of 11 forms minus dim M_4(Gamma(5))
    assert verify_relations(ideal, S.series)["passed"]


def test_gamma7_rank():
    S = assemble_form_space(7, 2)
    assert S.achieved_rank == S.claimed_dim == 26


def test_change_of_basis_invariance(x15):
    rnd = random.Random(7)
    while True:
        M = [[Fraction(rnd.randint(-3, 3)) for _ in range(3)] for _ in range(3)]
        det = (M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) - M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0])
               + M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]))
        if det:
            break
    old = x15.series
    new = []
    for row in M:
        s = None
        for c, b in zip(row, old):
            t = b * c
            s = t if s is None else s + t
        new.append(s)
    ideal = find_relations(new, 2, 4)
    assert len(ideal.relations) == 1
    # substitute new_i = sum_j M[i][j] old_j into the relation and compare with the known conic
    _, terms = ideal.relations[0]
    poly = {}
    for e, c in terms.items():
        idx = [i for i, p in enumerate(e) for _ in range(p)]
        for j in range(3):
            for k in range(3):
                key = [0, 0, 0]
                key[j] += 1
                key[k] += 1
                poly[tuple(key)] = poly.get(tuple(key), 0) + c * M[idx[0]][j] * M[idx[1]][k]
    poly = {k: v for k, v in poly.items() if v}
    ref = {(0, 2, 0): 1, (1, 0, 1): -1, (0, 1, 1): -4, (0, 0, 2): -16}
    scale = poly[(0, 2, 0)]
    assert {k: v / scale for k, v in poly.items()} == ref


def test_point_representation(x15):
    mat = point_representation(x15, L=5)
    assert mat == [[1, 0, 0, 60, -120], [0, 1, 0, 6, -9], [0, 0, 1, -4, 12]]
    with pytest.raises(ValueError):
        point_representation(x15, L=4)


def test_point_representation_float():
    S = assemble_form_space(5, 2, group="Gamma1", prec=40)
    ideal = quadric_relations(S)
    taus = [0.1 + 0.8j, -0.3 + 1.1j, 0.45 + 0.7j, 0.2 + 1.3j, 0.05 + 0.9j, 0.1 + 0.8j]
    mat = point_representation(S, points=taus)
    _, terms = ideal.relations[0]
    for col in range(len(taus)):
        v = [mat[r][col] for r in range(3)]
        val = sum(c * v[0] ** e[0] * v[1] ** e[1] * v[2] ** e[2] for e, c in terms.items())
        assert abs(val) < 1e-8 * max(1.0, max(abs(x) for x in v) ** 2)
    # the duplicated point gives an identical column
    assert [mat[r][0] for r in range(3)] == [mat[r][5] for r in range(3)]
    with pytest.raises(ValueError):
        point_representation(S, points=taus[:4])


def test_elliptic_l4_quadrics():
    F = formal_weierstrass_expansion(EllCurveQ(3141, 5926), prec=14)
    x, y = F.xz, F.yz
    basis = [laurent_to_series(s) for s in (x**0, x, y, x * x)]
    ideal = find_relations(basis, 2, 8, -8, ["s0", "s1", "s2", "s3"])
    rels = [terms for _, terms in ideal.relations]
    assert {(0, 2, 0, 0): 1, (1, 0, 0, 1): -1} in rels
    assert {(0, 0, 2, 0): 1, (0, 1, 0, 1): -1, (1, 1, 0, 0): -3141, (2, 0, 0, 0): -5926} in rels
    assert len(rels) == 2


def test_x1_11_restrictions(fixtures_dir):
    S = assemble_form_space(0, 0, source="file", path=str(fixtures_dir / "x1_11.qexp"))
    assert S.achieved_rank == S.claimed_dim == 10
    V3 = restrict_vanishing(S, 10 - 3)
    assert len(V3.basis) == 3
    assert relations_of_degree(V3, 2).relations == []
    cubic = relations_of_degree(V3, 3)
    assert len(cubic.relations) == 1 and verify_relations(cubic, V3.series)["passed"]
    V4 = restrict_vanishing(S, 10 - 4)
    assert len(relations_of_degree(V4, 2).relations) == 2


def test_x1_11_file_matches_eisenstein(fixtures_dir):
    S = assemble_form_space(0, 0, source="file", path=str(fixtures_dir / "x1_11.qexp"))
    T = assemble_form_space(11, 2, group="Gamma1", prec=45)
    assert [s.coeffs for s in S.series] == [s.coeffs for s in T.series]


def test_cab_genus_and_dims():
    M = cab_model(3, 4, C34, 6, max_degree=2)
    assert M["genus"] == 3 and M["gaps"] == [1, 2, 5]
    assert sorted(M["rr_basis"]) == [(0, 0), (0, 1), (1, 0), (2, 0)]
    for k in range(5, 16):
        assert cab_model(3, 4, C34, k, max_degree=1)["dim"] == k - 2
    with pytest.raises(ValueError):
        cab_model(2, 4, {}, 5)


def test_cab_expansion_satisfies_curve():
    x, y = cab_expansion(3, 4, C34, 20)
    res = y**3 - x**4 - x - 2
    assert all(v == 0 for v in res.c)
    assert x.val == -3 and y.val == -4


@pytest.mark.parametrize("k", [6, 7, 8])
def test_cab_ideals(k):
    M = cab_model(3, 4, C34, k)
    assert M["verification"]["passed"]
    gen = M["generation"]
    n = M["dim"]
    # Sym^2 L(kP0) -> L(2kP0) is onto once k >= 2g + 1
    expected = n * (n + 1) // 2 - (2 * k - 2)
    assert gen[2]["dim"] == expected if k >= 7 else gen[2]["dim"] >= expected
    if k == 8:
        assert gen[3]["new_generators"] == 0


def test_model_ideal_json_round_trip(x15):
    ideal = quadric_relations(x15)
    back = ModelIdeal.from_dict(json.loads(ideal.to_json()))
    assert back.relations == ideal.relations and back.variables == ideal.variables
