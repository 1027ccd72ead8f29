"""Projective models of modular curves and C_{a,b} curves from expansions.

The common engine is :func:`find_relations`: expand every degree-d monomial
in a list of series, row-reduce over the common precision window and read
homogeneous relations off the kernel.  A window is trusted only if it is
longer than the degree of the line bundle the products live in, since a
nonzero section cannot vanish to higher order than that degree.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .eisenstein import TorsionLabel, eis_expansion, eis_weight2_diff
from .katz import Laurent
from .linalg import primitive_integer
from .numtower import CycElt, parse_cyc
from .qseries import PrecisionError, QSeries, dump_series, echelon_basis, load_series, series_eval_float

__all__ = [
    "GammaNData",
    "FormSpace",
    "ModelIdeal",
    "gamma_n_invariants",
    "gamma1_invariants",
    "assemble_form_space",
    "restrict_vanishing",
    "find_relations",
    "quadric_relations",
    "relations_of_degree",
    "verify_relations",
    "generation_report",
    "point_representation",
    "cab_model",
    "cab_expansion",
    "laurent_to_series",
]


def _prime_factors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def _phi(n: int) -> int:
    out = n
    for p in _prime_factors(n):
        out = out // p * (p - 1)
    return out


@dataclass(frozen=True)
class GammaNData:
    N: int
    index: int
    degree: int
    cusps: int
    degL1: Fraction
    genus: int
    group: str = "Gamma"

    def deg_L(self, k: int) -> Fraction:
        return k * self.degL1

    def rr_dim(self, k: int) -> int | None:
        """dim M_k by Riemann-Roch, or None when deg L_k < 2g - 1."""
        d = self.deg_L(k)
        if d < 2 * self.genus - 1 or d.denominator != 1:
            return None
        return int(d) + 1 - self.genus

    def as_dict(self) -> dict:
        return {
            "group": self.group, "N": self.N, "index": self.index, "degree": self.degree,
            "cusps": self.cusps, "degL1": str(self.degL1), "genus": self.genus,
        }


def gamma_n_invariants(N: int) -> GammaNData:
    """Degree, cusp count, deg L_1 and genus of X(N), N >= 3."""
    if N < 3:
        raise ValueError("X(N) numerology needs N >= 3")
    index = N**3
    for p in _prime_factors(N):
        index = index * (p * p - 1) // (p * p)
    d = index // 2
    c = d // N
    degL1 = Fraction(d, 12)
    g = 1 + degL1 - Fraction(c, 2)
    assert g.denominator == 1
    return GammaNData(N, index, d, c, degL1, int(g))


def gamma1_invariants(N: int) -> GammaNData:
    """Same data for X_1(N), N >= 5 (no elliptic points, all cusps regular)."""
    if N < 5:
        raise ValueError("X_1(N) numerology needs N >= 5")
    mu = N * N
    for p in _prime_factors(N):
        mu = mu * (p * p - 1) // (p * p)
    mu //= 2
    c = sum(_phi(d) * _phi(N // d) for d in range(1, N + 1) if N % d == 0) // 2
    degL1 = Fraction(mu, 12)
    g = 1 + degL1 - Fraction(c, 2)
    return GammaNData(N, mu, mu, c, degL1, int(g), group="Gamma1")


def _invariants(group: str, N: int) -> GammaNData:
    g = group.lower()
    if g in ("gamma", "gamma(n)"):
        return gamma_n_invariants(N)
    if g in ("gamma1", "gamma_1", "gamma1(n)"):
        return gamma1_invariants(N)
    raise ValueError(f"unsupported group {group!r}")


# ---------------------------------------------------------------- form space
@dataclass
class FormSpace:
    group: str
    level: int
    weight: int
    basis: list[tuple[str, QSeries]]
    claimed_dim: int | None
    achieved_rank: int = 0
    notes: dict = field(default_factory=dict)

    @property
    def series(self) -> list[QSeries]:
        return [s for _, s in self.basis]

    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.basis]

    @property
    def data(self) -> GammaNData:
        return _invariants(self.group, self.level)

    @property
    def precision(self) -> int:
        """Smallest absolute precision among the basis, in local units at the cusp."""
        return min((s.abs_prec for s in self.series if s.abs_prec is not None), default=10**9)

    def to_text(self) -> str:
        header = {"group": self.group, "level": self.level, "weight": self.weight}
        return dump_series(self.basis, header)


def _echelon_named(rows: list[QSeries], names: list[str] | None = None):
    basis, _ = echelon_basis(rows)
    out = []
    for idx, s in enumerate(basis):
        if all(c.is_rational() for c in s.coeffs):
            s = s.descend()
        out.append((names[idx] if names and len(names) == len(basis) else f"f{idx}", s))
    return out


def _reduce_against(rows: list[list], pivots: list[int], vec: list):
    v = list(vec)
    for r, p in zip(rows, pivots):
        c = v[p]
        if c:
            v = [x - c * y if y else x for x, y in zip(v, r)]
    return v


def _incremental_span(candidates, width: int, target: int | None, zero):
    """Greedy independent subset of coefficient vectors (stops at ``target``)."""
    rows: list[list] = []
    pivots: list[int] = []
    chosen = []
    for idx, vec in candidates:
        v = _reduce_against(rows, pivots, vec)
        p = next((i for i, x in enumerate(v) if x), None)
        if p is None:
            continue
        inv = v[p].inverse()
        v = [x * inv if x else x for x in v]
        rows.append(v)
        pivots.append(p)
        chosen.append(idx)
        if target is not None and len(chosen) >= target:
            break
    return chosen


def assemble_form_space(N: int, k: int, source: str = "eisenstein-products",
                        group: str = "Gamma", path: str | None = None, text: str | None = None,
                        prec: int | None = None) -> FormSpace:
    """Weight-k forms for Gamma(N) or Gamma1(N), from Eisenstein products or a basis file.

    Eisenstein mode uses G_1 series, their products, weight-2 differences and
    (k >= 3) single G_k; ``prec`` is the absolute precision in local units at
    infinity (default: enough for the quadric audit).  The achieved rank is
    recorded next to the Riemann-Roch dimension; a shortfall is reported, not
    padded.
    """
    if source == "file":
        if text is None:
            if path is None:
                raise ValueError("file mode needs a path or text")
            with open(path) as fh:
                text = fh.read()
        named, header = load_series(text)
        grp = header.get("group", group)
        lvl = int(header.get("level", N or 0))
        wt = int(header.get("weight", k or 0))
        try:
            claimed = _invariants(grp, lvl).rr_dim(wt)
        except ValueError:
            claimed = None
        rows = [s for _, s in named]
        basis = _echelon_named(rows, [n for n, _ in named])
        space = FormSpace(grp, lvl, wt, basis, claimed, len(basis))
        space.notes["source"] = "file"
        return space
    if source != "eisenstein-products":
        raise ValueError(f"unknown source {source!r}")
    if k < 1 or N < 3:
        raise ValueError("Eisenstein mode needs k >= 1 and N >= 3")
    data = _invariants(group, N)
    claimed = data.rr_dim(k)
    gamma1 = data.group == "Gamma1"
    width = 1 if gamma1 else N
    if prec is None:
        prec = int(2 * k * data.degL1) + 2
    qprec = -(-prec // width) + 1
    if gamma1:
        labels = [TorsionLabel(i, 0, N) for i in range(1, N)]
    else:
        labels = [TorsionLabel(i, j, N) for i in range(N) for j in range(N) if i or j]
    # one representative of each pair +-alpha
    half = []
    seen = set()
    for a in labels:
        if (a.i, a.j) in seen:
            continue
        seen.add((a.i, a.j))
        seen.add(((-a.i) % N, (-a.j) % N))
        half.append(a)
    g1 = {(a.i, a.j): eis_expansion(1, a, qprec) for a in labels}

    def gen():
        if k == 1:
            for a in labels:
                yield f"G1{a.i}{a.j}", g1[(a.i, a.j)]
            return
        if k == 2:
            for a in half:
                yield f"P{a.i}{a.j}", eis_weight2_diff(a, qprec)
        if k >= 3:
            for a in labels:
                yield f"G{k}_{a.i}{a.j}", eis_expansion(k, a, qprec)
        for combo in itertools.combinations_with_replacement(labels, k):
            s = g1[(combo[0].i, combo[0].j)]
            for a in combo[1:]:
                s = s * g1[(a.i, a.j)]
            yield "*".join(f"G1{a.i}{a.j}" for a in combo), s

    level = N
    zero = CycElt.zero(level)
    window = prec
    cands = []

    def vectors():
        for idx, (name, s) in enumerate(gen()):
            s = s.with_level(level)
            if gamma1:
                s = s.compress()
                if s.den != 1:
                    raise ArithmeticError("Gamma1 candidate has fractional exponents")
            cands.append((name, s))
            vec = [s.coeff(e) if e >= s.val else zero for e in range(window)]
            yield idx, vec

    chosen = _incremental_span(vectors(), window, claimed, zero)
    rows = [cands[i][1].truncate(window) for i in chosen]
    basis = _echelon_named(rows) if rows else []
    space = FormSpace(data.group, N, k, basis, claimed, len(basis))
    space.notes.update({"source": "eisenstein-products", "generators": [cands[i][0] for i in chosen],
                        "candidates_tried": len(cands)})
    return space


def restrict_vanishing(S: FormSpace, order: int) -> FormSpace:
    """Subspace of forms vanishing to order >= ``order`` at infinity (local units)."""
    keep = [(n, s) for n, s in S.basis if s.val >= order]
    out = FormSpace(S.group, S.level, S.weight, keep, None, len(keep), dict(S.notes))
    out.notes["vanishing_order"] = order
    return out


# ------------------------------------------------------------------ relations
@dataclass
class ModelIdeal:
    variables: list[str]
    relations: list[tuple[int, dict[tuple[int, ...], object]]]
    audit: dict = field(default_factory=dict)

    def of_degree(self, d: int):
        return [r for deg, r in self.relations if deg == d]

    def to_dict(self) -> dict:
        rels = []
        for deg, terms in self.relations:
            rels.append({
                "degree": deg,
                "terms": [[list(e), _coef_text(c)] for e, c in terms.items()],
            })
        return {"variables": list(self.variables), "relations": rels, "audit": self.audit}

    def to_json(self, extra: dict | None = None) -> str:
        doc = self.to_dict()
        if extra:
            doc.update(extra)
        return json.dumps(doc, sort_keys=True, indent=1)

    @classmethod
    def from_dict(cls, doc: dict) -> "ModelIdeal":
        rels = []
        for r in doc["relations"]:
            terms = {tuple(e): _coef_parse(c) for e, c in r["terms"]}
            rels.append((int(r["degree"]), terms))
        return cls(list(doc["variables"]), rels, dict(doc.get("audit", {})))

    def pretty(self) -> list[str]:
        out = []
        for _, terms in self.relations:
            parts = []
            for e, c in terms.items():
                mono = "*".join(
                    f"{v}^{p}" if p > 1 else v for v, p in zip(self.variables, e) if p
                )
                parts.append(f"({_coef_text(c)})*{mono}")
            out.append(" + ".join(parts) + " = 0")
        return out


def _coef_text(c) -> str:
    if isinstance(c, CycElt):
        if c.is_rational():
            num, den = c.raw()
            return str(Fraction(num[0], den))
        return str(c)
    return str(c)


def _coef_parse(text: str):
    if "(mod" in text:
        return parse_cyc(text)
    f = Fraction(text)
    return int(f) if f.denominator == 1 else f


def _monomials(n: int, d: int):
    """Exponent vectors of degree d in n variables."""
    for combo in itertools.combinations_with_replacement(range(n), d):
        e = [0] * n
        for i in combo:
            e[i] += 1
        yield tuple(e), combo


def _products(series: Sequence[QSeries], d: int):
    cache: dict[tuple[int, ...], QSeries] = {}

    def prod(combo):
        if combo not in cache:
            cache[combo] = series[combo[0]] if len(combo) == 1 else prod(combo[:-1]) * series[combo[-1]]
        return cache[combo]

    return [(e, combo, prod(combo)) for e, combo in _monomials(len(series), d)]


def _normalize(vec):
    lead = next(x for x in vec if x)
    if all(x.is_rational() for x in vec):
        return primitive_integer([Fraction(x.raw()[0][0], x.raw()[1]) for x in vec])
    inv = lead.inverse()
    return [x * inv for x in vec]


def find_relations(series: Sequence[QSeries], degree: int, bound: int,
                   lowest: int = 0, names: Sequence[str] | None = None) -> ModelIdeal:
    """Homogeneous degree-``degree`` relations among ``series``.

    ``bound`` is the degree of the line bundle holding the products and
    ``lowest`` the smallest exponent a product may have (0 for holomorphic
    forms, minus the pole bound for Laurent expansions).  The comparison
    window must reach past ``lowest + bound``; otherwise a
    :class:`PrecisionError` is raised.
    """
    names = list(names) if names else [f"T{i}" for i in range(len(series))]
    if len(series) == 0:
        return ModelIdeal(names, [], {"degree": degree, "monomials": 0})
    prods = _products(series, degree)
    abs_precs = [s.abs_prec for _, _, s in prods if s.abs_prec is not None]
    window_end = min(abs_precs) if abs_precs else None
    compared = None if window_end is None else window_end - lowest
    audit = {"degree": degree, "bundle_degree": bound, "compared_coefficients": compared,
             "monomials": len(prods)}
    if compared is not None and compared <= bound:
        raise PrecisionError(
            f"only {compared} coefficients compared, need more than the bundle degree {bound}"
        )

    def key(item):
        e, combo, s = item
        v = s.val if s.coeffs else 10**9
        return (v, combo[-1] - combo[0], tuple(-x for x in e))

    prods.sort(key=key)
    rows = [s for _, _, s in prods]
    _, kernel = echelon_basis(rows)
    rels = []
    for vec in kernel:
        coeffs = _normalize(vec)
        terms = {}
        for (e, _, _), c in zip(prods, coeffs):
            if c:
                terms[e] = c
        rels.append((degree, terms))
    audit["relations"] = len(rels)
    audit["passed"] = True
    return ModelIdeal(names, rels, audit)


def quadric_relations(S: FormSpace) -> ModelIdeal:
    """Quadrics through the image of X under the forms in S (weight k).

    Requires precision (local units) above deg L_{2k} = 2k * deg L_1.
    """
    data = S.data
    bound = int(2 * S.weight * data.degL1)
    ideal = find_relations(S.series, 2, bound, 0, S.names)
    ideal.audit.update({"group": S.group, "level": S.level, "weight": S.weight})
    return ideal


def relations_of_degree(S: FormSpace, degree: int) -> ModelIdeal:
    data = S.data
    bound = int(degree * S.weight * data.degL1)
    ideal = find_relations(S.series, degree, bound, 0, S.names)
    ideal.audit.update({"group": S.group, "level": S.level, "weight": S.weight})
    return ideal


def verify_relations(ideal: ModelIdeal, series: Sequence[QSeries]) -> dict:
    """Re-expand every relation exactly; each must vanish to the known precision."""
    results = []
    for deg, terms in ideal.relations:
        total = None
        for e, c in terms.items():
            s = None
            for i, p in enumerate(e):
                for _ in range(p):
                    s = series[i] if s is None else s * series[i]
            if isinstance(c, CycElt):
                lvl = math.lcm(c.level, s.level)
                term = s.with_level(lvl).scale(c.lift(lvl))
            else:
                term = s * c
            total = term if total is None else total + term
        ok = total is not None and total.is_zero()
        results.append({"degree": deg, "zero": ok,
                        "precision": None if total is None else total.abs_prec})
    return {"relations": results, "passed": all(r["zero"] for r in results)}


def generation_report(series: Sequence[QSeries], max_degree: int, bound_per_degree: int,
                      lowest_per_degree: int = 0) -> dict:
    """dim I_d and how many new generators appear in each degree 2..max_degree."""
    n = len(series)
    report = {}
    prev: ModelIdeal | None = None
    for d in range(2, max_degree + 1):
        ideal = find_relations(series, d, d * bound_per_degree, d * lowest_per_degree)
        mons = [e for e, _ in _monomials(n, d)]
        index = {e: i for i, e in enumerate(mons)}
        lifted = []
        if prev is not None:
            for _, terms in prev.relations:
                for v in range(n):
                    row = [Fraction(0)] * len(mons)
                    for e, c in terms.items():
                        e2 = list(e)
                        e2[v] += 1
                        row[index[tuple(e2)]] += _as_frac(c)
                    lifted.append(row)
        from .linalg import rank
        r = rank(lifted) if lifted else 0
        report[d] = {"dim": len(ideal.relations), "from_lower": r,
                     "new_generators": len(ideal.relations) - r}
        prev = ideal
    return report


def _as_frac(c):
    if isinstance(c, CycElt):
        if not c.is_rational():
            raise ValueError("generation report needs rational relations")
        num, den = c.raw()
        return Fraction(num[0], den)
    return Fraction(c)


def point_representation(S: FormSpace, points: Sequence[complex] | None = None,
                         L: int | None = None):
    """Columns are projective points [f_0 : ... : f_n].

    With ``L``: exact coefficient matrix for the divisor L*infinity
    (column e holds the q^e coefficients).  With ``points``: float values
    f_i(tau_j).  Either count must exceed deg L_{2k}.
    """
    data = S.data
    bound = int(2 * S.weight * data.degL1)
    if (L is None) == (points is None):
        raise ValueError("give exactly one of L and points")
    if L is not None:
        if L <= bound:
            raise ValueError(f"L = {L} must exceed deg L_{2 * S.weight} = {bound}")
        if S.precision < L:
            raise PrecisionError(f"basis known to {S.precision} coefficients, need {L}")
        out = []
        for s in S.series:
            row = []
            for e in range(L):
                c = s.coeff(e)
                row.append(Fraction(c.raw()[0][0], c.raw()[1]) if c.is_rational() else c)
            out.append(row)
        return out
    if len(points) <= bound:
        raise ValueError(f"{len(points)} points do not exceed deg L_{2 * S.weight} = {bound}")
    return [[series_eval_float(s, tau) for tau in points] for s in S.series]


# -------------------------------------------------------------------- C_ab
def laurent_to_series(f: Laurent) -> QSeries:
    """Wrap an exact Laurent expansion as a QSeries in the local parameter."""
    return QSeries([Fraction(c) for c in f.c], val=f.val, prec=len(f.c))


def cab_expansion(a: int, b: int, lower: dict[tuple[int, int], object], prec: int):
    """x = t^-a X(t), y = t^-b Y(t) at the point at infinity of y^a = x^b + sum c x^i y^j.

    The local parameter is t = x^u y^v with u a + v b = -1; X and Y are
    solved coefficient by coefficient (the linearization has determinant 1).
    Returns Laurent series for x and y with ``prec`` coefficients each.
    """
    if math.gcd(a, b) != 1:
        raise ValueError("a and b must be coprime")
    u, v = _bezout_neg1(a, b)
    one = Fraction(1)
    X = [one] + [Fraction(0)] * (prec - 1)
    Y = [one] + [Fraction(0)] * (prec - 1)
    terms = [(i, j, Fraction(c), a * b - a * i - b * j) for (i, j), c in lower.items()]
    for i, j, _, shift in terms:
        if shift <= 0:
            raise ValueError(f"monomial x^{i} y^{j} is not below y^{a} in weighted degree")

    def residuals(X, Y, m):
        Xs, Ys = Laurent(X[: m + 1], 0), Laurent(Y[: m + 1], 0)
        F = Ys**a - Xs**b
        for i, j, c, shift in terms:
            if shift <= m:
                mon = (Xs**i) * (Ys**j) * c
                F = F - Laurent([0] * shift + mon.c[: m + 1 - shift], 0)
        G = (Xs**u) * (Ys**v) - 1
        return F[m], G[m]

    for m in range(1, prec):
        f0, g0 = residuals(X, Y, m)
        # a dY - b dX = -f0 and u dX + v dY = -g0; the determinant is 1
        dX = a * g0 - v * f0
        dY = b * g0 + u * f0
        X[m] += dX
        Y[m] += dY
    return Laurent(X, -a), Laurent(Y, -b)


def _bezout_neg1(a: int, b: int) -> tuple[int, int]:
    for u in range(-b, b + 1):
        if (-1 - u * a) % b == 0:
            v = (-1 - u * a) // b
            return u, v
    raise ValueError("no Bezout pair")


def _semigroup(a: int, b: int, upto: int) -> set[int]:
    return {a * i + b * j for i in range(upto // a + 1) for j in range(upto // b + 1) if a * i + b * j <= upto}


def cab_model(a: int, b: int, lower: dict[tuple[int, int], object], k: int,
              max_degree: int = 3) -> dict:
    """Riemann-Roch basis of L(k P0), genus, and the ideal of the image of C under it."""
    if math.gcd(a, b) != 1:
        raise ValueError("a and b must be coprime")
    if k < 0:
        raise ValueError("k must be nonnegative")
    genus = (a - 1) * (b - 1) // 2
    gaps = sorted(set(range(1, 2 * genus + 1)) - _semigroup(a, b, 2 * genus))
    assert len(gaps) == genus
    basis = sorted(
        ((i, j) for j in range(a) for i in range(k // a + 1) if a * i + b * j <= k),
        key=lambda ij: a * ij[0] + b * ij[1],
    )
    names = [f"s{n}" for n in range(len(basis))]
    out = {"rr_basis": basis, "pole_orders": [a * i + b * j for i, j in basis],
           "genus": genus, "gaps": gaps, "dim": len(basis), "names": names}
    if len(basis) < 2:
        out["ideal"] = ModelIdeal(names, [], {})
        return out
    prec = max_degree * k + 6
    x, y = cab_expansion(a, b, lower, prec + 2 * k)
    series = []
    for i, j in basis:
        m = (x**i) * (y**j) if i + j else Laurent([Fraction(1)] + [Fraction(0)] * (prec - 1), 0)
        series.append(laurent_to_series(m))
    rels = []
    audits = []
    for d in range(2, max_degree + 1):
        ideal = find_relations(series, d, d * k, -d * k, names)
        rels.extend(ideal.relations)
        audits.append(ideal.audit)
    out["ideal"] = ModelIdeal(names, rels, {"per_degree": audits})
    out["series"] = series
    out["generation"] = generation_report(series, max_degree, k, -k)
    out["verification"] = verify_relations(out["ideal"], series)
    return out
