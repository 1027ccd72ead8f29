"""Classical modular polynomials Phi_N(x, y).

Two independent routes are provided.  The q-expansion route builds
prod_{(a,b,d)} (y - j((a tau + b)/d)) over upper triangular coset
representatives, reads each coefficient of y as a Laurent series in q and
rewrites it as a polynomial in j.  The interpolation route samples
(j(tau), j(N tau)) numerically and solves for the coefficients.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from .eisenstein import level1_series
from .qseries import PrecisionError, QSeries, series_eval_mp, series_substitute

__all__ = [
    "SublatticeRep",
    "ModPoly",
    "ResidualError",
    "sublattice_reps",
    "psi",
    "j_polynomial_reduce",
    "required_j_precision",
    "modular_polynomial",
    "modpoly_verify",
    "coset_identity_residual",
]

MARGIN = 10


class ResidualError(ArithmeticError):
    """A series did not reduce to a polynomial in j with zero remainder."""


class SublatticeRep(NamedTuple):
    a: int
    b: int
    d: int


def psi(N: int) -> int:
    """Index N * prod_{p | N} (1 + 1/p) of Gamma_0(N)."""
    out, n, p = N, N, 2
    while p * p <= n:
        if n % p == 0:
            out = out // p * (p + 1)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out = out // n * (n + 1)
    return out


def sublattice_reps(N: int) -> list[SublatticeRep]:
    """Upper triangular (a b; 0 d) with ad = N, 0 <= b < d, gcd(a, b, d) = 1."""
    if N < 1:
        raise ValueError("N must be positive")
    reps = []
    for a in range(1, N + 1):
        if N % a:
            continue
        d = N // a
        for b in range(d):
            if math.gcd(math.gcd(a, b), d) == 1:
                reps.append(SublatticeRep(a, b, d))
    return reps


@dataclass
class ModPoly:
    """Sum of c[(k, l)] x^k y^l with integer coefficients."""

    level: int
    coeffs: dict[tuple[int, int], int] = field(default_factory=dict)

    def __post_init__(self):
        self.coeffs = {kl: int(c) for kl, c in self.coeffs.items() if c}

    def degree(self) -> tuple[int, int]:
        return (
            max((k for k, _ in self.coeffs), default=0),
            max((l for _, l in self.coeffs), default=0),
        )

    def is_symmetric(self) -> bool:
        return all(self.coeffs.get((l, k)) == c for (k, l), c in self.coeffs.items())

    def to_json(self, extra: dict | None = None) -> str:
        sym = self.is_symmetric()
        keys = sorted(kl for kl in self.coeffs if not sym or kl[0] >= kl[1])
        doc = {
            "level": self.level,
            "coeffs": [[k, l, str(self.coeffs[(k, l)])] for k, l in keys],
        }
        if not sym:
            doc["symmetric"] = False
        if extra:
            doc.update(extra)
        return json.dumps(doc, sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str | dict) -> "ModPoly":
        doc = json.loads(text) if isinstance(text, str) else text
        coeffs = {}
        sym = doc.get("symmetric", True)
        for k, l, c in doc["coeffs"]:
            coeffs[(int(k), int(l))] = int(c)
            if sym:
                coeffs[(int(l), int(k))] = int(c)
        return cls(int(doc["level"]), coeffs)

    def __call__(self, x, y):
        return sum(c * x**k * y**l for (k, l), c in self.coeffs.items())


# ----------------------------------------------------------------- reduction
def _j_powers(jser: QSeries, n: int) -> list[QSeries]:
    pw = [QSeries([1])]
    for _ in range(n):
        pw.append(pw[-1] * jser)
    return pw


def j_polynomial_reduce(s: QSeries, jser: QSeries, margin: int = 1) -> list[Fraction]:
    """Coefficients [p0, p1, ...] of the polynomial P with P(j) = s.

    ``s`` must have integral exponents and rational coefficients.  After the
    principal part and constant term are removed, the remaining known
    coefficients (at least ``margin`` of them) must all vanish.
    """
    if s.den != 1 or jser.den != 1:
        raise ValueError("j-polynomial reduction needs integral exponents")
    if s.coeffs and not all(c.is_rational() for c in s.coeffs):
        raise ResidualError("series has irrational coefficients")
    s = s.with_level(1) if s.level == 1 else s.descend()
    top = max(0, -s.val) if s.coeffs else 0
    powers = _j_powers(jser, top)
    poly = [Fraction(0)] * (top + 1)
    r = s
    while r.coeffs and r.val < 0:
        m = -r.val
        c = r.lead()
        poly[m] = Fraction(*c.raw()[0][:1], c.raw()[1])
        r = r - powers[m] * c
    c0 = r.coeff(0) if (r.abs_prec is None or r.abs_prec > 0) else None
    if c0 is None:
        raise PrecisionError("constant term of the series is unknown")
    poly[0] = Fraction(c0.raw()[0][0], c0.raw()[1])
    r = r - poly[0]
    if r.abs_prec is not None and r.abs_prec < 1 + margin:
        raise PrecisionError(
            f"only {max(r.abs_prec - 1, 0)} coefficients left to audit the residual, need {margin}"
        )
    if r.coeffs:
        raise ResidualError(f"nonzero residual starting at q^{r.val}")
    while len(poly) > 1 and not poly[-1]:
        poly.pop()
    return poly


# ------------------------------------------------------------------- q-exp
def required_j_precision(N: int, margin: int = MARGIN) -> int:
    """Absolute q-precision of j needed by the q-expansion method at level N."""
    reps = sublattice_reps(N)
    total_pole = sum(r.a * r.a for r in reps)  # in units of q^(1/N)
    target = N * (1 + margin)
    need = 0
    for r in reps:
        # rel prec of the substituted series, in 1/N units, is a^2 * (rel prec of j)
        need = max(need, -(-(target + total_pole) // (r.a * r.a)))
    return need - 1


def _coset_polynomial(N: int, jser: QSeries, target: int) -> list[QSeries]:
    """Coefficients (in y, low to high) of prod (y - j((a tau + b)/d)), den N.

    Each coefficient is truncated at absolute exponent ``target`` (units 1/N).
    """
    reps = sublattice_reps(N)
    conj = []
    for r in reps:
        s = series_substitute(jser, r.a, r.b, r.d).with_den(N)
        conj.append((r.a * r.a, s))
    conj.sort(key=lambda t: t[0])
    level = N if N > 1 else 1
    poly = [QSeries([1], den=N, level=level)]
    remaining = sum(p for p, _ in conj)
    for pole, s in conj:
        remaining -= pole
        cut = target + remaining
        s = s.with_level(level)
        new = []
        for k in range(len(poly) + 1):
            term = None
            if k >= 1:
                term = poly[k - 1]
            if k < len(poly):
                prod = (poly[k] * s).truncate(cut)
                term = -prod if term is None else term - prod
            new.append(term.truncate(cut))
        poly = new
    return poly


def modular_polynomial(N: int, method: str = "qexp", jprec: int | None = None,
                       margin: int = MARGIN, report: dict | None = None) -> ModPoly:
    """Phi_N with Phi_N(j(tau), j(N tau)) = 0, monic of degree psi(N) in y.

    ``report`` (if given) is filled with audit data: precision used,
    Galois-invariance results for qexp, conditioning for interp.
    """
    if N < 1:
        raise ValueError("N must be positive")
    if method == "qexp":
        return _modpoly_qexp(N, jprec, margin, report)
    if method == "interp":
        # escalate working precision until the solution rounds cleanly
        dps = None
        for _ in range(4):
            rep: dict = {}
            try:
                P = _modpoly_interp(N, rep, dps)
            except ResidualError:
                dps = 2 * rep["dps"]
                continue
            if report is not None:
                report.update(rep)
            return P
        if report is not None:
            report.update(rep)
        raise ResidualError(f"rounding residual {rep['max_rounding_residual']:.3g} exceeds 0.01")
    raise ValueError(f"unknown method {method!r}")


def _modpoly_qexp(N, jprec, margin, report):
    need = required_j_precision(N, margin)
    if jprec is None:
        jprec = need
    if jprec < need:
        raise PrecisionError(f"j needs precision {need} at level {N}, got {jprec}")
    jser = level1_series("j", jprec)
    target = N * (1 + margin)
    poly = _coset_polynomial(N, jser, target)
    units = [t for t in range(1, N + 1) if math.gcd(t, N) == 1]
    coeffs: dict[tuple[int, int], int] = {}
    galois_ok = True
    for l, ser in enumerate(poly):
        for c in ser.coeffs:
            if any(c.galois(t) != c for t in units):
                galois_ok = False
        if not galois_ok:
            raise ResidualError(f"coefficient of y^{l} is not Galois invariant")
        ser = ser.compress()
        if ser.coeffs and ser.den != 1:
            raise ResidualError(f"coefficient of y^{l} has fractional exponents")
        if ser.den != 1:
            ser = QSeries.zero(ser.abs_prec // ser.den if ser.abs_prec is not None else None)
        ser = ser.descend()
        p = j_polynomial_reduce(ser, jser, margin)
        for k, c in enumerate(p):
            if c.denominator != 1:
                raise ResidualError(f"non-integral coefficient {c} at x^{k} y^{l}")
            if c:
                coeffs[(k, l)] = int(c)
    if report is not None:
        report.update({"method": "qexp", "j_precision": jprec, "margin": margin,
                       "galois_invariant": galois_ok})
    return ModPoly(N, coeffs)


# ------------------------------------------------------------------ interp
def _modpoly_interp(N, report, dps: int | None = None, y_im: float = 1.1):
    if N < 2:
        raise ValueError("interpolation assumes a symmetric polynomial (N >= 2)")
    import mpmath
    import numpy as np

    n = psi(N)
    unknowns = [(k, l) for k in range(n) for l in range(k + 1)]
    nsamp = (n + 1) ** 2 + 1
    # coefficients of Phi_N grow roughly like N^(3N); leave room for them
    digits = int(3 * n * math.log10(max(N, 2)) * 2) + 40
    dps = dps or max(60, digits)
    jprec = int(dps / (2 * math.pi * y_im * math.log10(math.e))) + 10
    jser = level1_series("j", jprec)
    with mpmath.workdps(dps):
        rows, rhs = [], []
        for s in range(nsamp):
            # offset keeps samples off Re(tau) in {0, 1/2}, where j is real
            tau = mpmath.mpc((mpmath.mpf(s) + 0.25) / nsamp, y_im)
            x = series_eval_mp(jser, tau, dps)
            y = series_eval_mp(jser, N * tau, dps)
            row = []
            for k, l in unknowns:
                v = x**k * y**l
                if k != l:
                    v += x**l * y**k
                row.append(v)
            rows.append(row)
            rhs.append(-(x**n + y**n))
        # real system, scaled columns
        m = len(unknowns)
        A = mpmath.matrix(2 * nsamp, m)
        bvec = mpmath.matrix(2 * nsamp, 1)
        scale = []
        for c in range(m):
            sc = max(abs(rows[r][c]) for r in range(nsamp))
            scale.append(sc)
        sb = max(abs(v) for v in rhs)
        for r in range(nsamp):
            rs = max([abs(rhs[r]) / sb] + [abs(rows[r][c]) / scale[c] for c in range(m)])
            for c in range(m):
                v = rows[r][c] / scale[c] / rs
                A[2 * r, c] = v.real
                A[2 * r + 1, c] = v.imag
            v = rhs[r] / sb / rs
            bvec[2 * r] = v.real
            bvec[2 * r + 1] = v.imag
        sol, _ = mpmath.qr_solve(A, bvec)
        values = [sol[c] * sb / scale[c] for c in range(m)]
        Af = np.array([[float(A[i, j]) for j in range(m)] for i in range(A.rows)])
        cond = float(np.linalg.cond(Af))
        coeffs: dict[tuple[int, int], int] = {(n, 0): 1, (0, n): 1}
        worst = 0.0
        for (k, l), v in zip(unknowns, values):
            r = int(mpmath.nint(v))
            worst = max(worst, float(abs(v - r)))
            if r:
                coeffs[(k, l)] = r
                coeffs[(l, k)] = r
    if report is not None:
        report.update({"method": "interp", "samples": nsamp, "dps": dps,
                       "condition_number": cond, "max_rounding_residual": worst})
    if worst > 0.01:
        raise ResidualError(f"rounding residual {worst:.3g} exceeds 0.01")
    return ModPoly(N, coeffs)


# ------------------------------------------------------------------ checks
def _vanishing_series(P: ModPoly, prec: int) -> QSeries:
    N = P.level
    degx, degy = P.degree()
    maxpole = max((k + N * l for k, l in P.coeffs), default=0)
    jser = level1_series("j", prec + maxpole + 1)
    xp = _j_powers(jser, degx)
    yp = [series_substitute(p, N, 0, 1) for p in _j_powers(jser, degy)]
    total = QSeries.zero(prec)
    for (k, l), c in sorted(P.coeffs.items()):
        total = total + (xp[k] * yp[l]).truncate(prec) * c
    return total.truncate(prec)


def modpoly_verify(P: ModPoly, prec: int = 20) -> dict:
    """Symmetry, integrality, degree and Phi(j(tau), j(N tau)) = 0 up to q^prec."""
    N = P.level
    n = psi(N)
    van = _vanishing_series(P, prec)
    checks = {
        "symmetry": P.is_symmetric() if N > 1 else True,
        "integrality": all(isinstance(c, int) for c in P.coeffs.values()),
        "degree": P.degree() == (n, n) and P.coeffs.get((0, n)) == 1,
        "vanishing": van.is_zero() and van.abs_prec is not None and van.abs_prec >= prec,
    }
    return {
        "level": N,
        "precision": prec,
        "checks": checks,
        "first_nonzero": None if van.is_zero() else van.val,
        "passed": all(checks.values()),
    }


def coset_identity_residual(P: ModPoly, terms: int = 30) -> list[QSeries]:
    """Phi_N(X, j) - prod (X - j((a tau + b)/d)), per power of X, to q^terms.

    Every returned series is zero (with precision >= terms) when the identity holds.
    """
    N = P.level
    n = psi(N)
    maxpole = max((l for _, l in P.coeffs), default=0)
    total_pole = sum(r.a * r.a for r in sublattice_reps(N))
    jprec = max(terms * N + total_pole, terms + maxpole) + 1
    jser = level1_series("j", jprec)
    rhs = _coset_polynomial(N, jser, terms * N)
    jp = _j_powers(jser, maxpole)
    out = []
    for k in range(n + 1):
        lhs = QSeries.zero(terms)
        for (kk, l), c in P.coeffs.items():
            if kk == k:
                lhs = lhs + jp[l].truncate(terms) * c
        diff = lhs.with_den(N).with_level(rhs[k].level) - rhs[k]
        out.append(diff.truncate(terms * N))
    return out
