"""Eisenstein series with torsion offsets, level-one forms, and lattice-sum oracles.

For alpha = a1 + a2*tau with (a1, a2) = (i/N, j/N) the series

    G_{k,alpha}(tau) = sum'_{l in Z + Z tau} (l + alpha)**(-k)

is expanded row by row (fixed imaginary offset n' = n + a2, summing over m
first).  Writing w = zeta_N**i,

    G / (2 pi i)^k = c0 + 1/(k-1)! * sum_{r >= 1} r^(k-1) *
        [ (-1)^k sum_{n' > 0} w^r q^(r n')  +  sum_{n' < 0} w^(-r) q^(r |n'|) ]

where c0 comes from the row n' = 0 (present only when a2 is integral).  For
k <= 2 single series are not absolutely convergent; the constants chosen
here are the ones that make every admissible combination (sum m = 0,
sum m * lift = 0) agree with the grouped lattice sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .numtower import CycElt
from .qseries import QSeries

__all__ = [
    "TorsionLabel",
    "DivisorCombo",
    "eis_expansion",
    "eis_weight2_diff",
    "eis_combo",
    "level1_series",
    "OracleResult",
    "lattice_oracle",
    "lattice_oracle_combo",
    "lattice_partial_sums",
    "weierstrass_p",
    "weierstrass_p_prime",
    "weierstrass_invariants",
]


@dataclass(frozen=True)
class TorsionLabel:
    """The N-torsion point alpha = i/N + (j/N)*tau, stored reduced mod N."""

    i: int
    j: int
    level: int

    def __post_init__(self):
        if self.level < 1:
            raise ValueError("level must be positive")
        object.__setattr__(self, "i", self.i % self.level)
        object.__setattr__(self, "j", self.j % self.level)

    @property
    def is_zero(self) -> bool:
        return self.i == 0 and self.j == 0

    def __neg__(self):
        return TorsionLabel(-self.i, -self.j, self.level)

    def __add__(self, other: "TorsionLabel"):
        if other.level != self.level:
            raise ValueError("level mismatch")
        return TorsionLabel(self.i + other.i, self.j + other.j, self.level)

    def scaled(self, t: int) -> "TorsionLabel":
        return TorsionLabel(t * self.i, t * self.j, self.level)

    def coords(self) -> tuple[Fraction, Fraction]:
        return Fraction(self.i, self.level), Fraction(self.j, self.level)


class DivisorCombo:
    """Formal sum of N-torsion points with explicit lifts to (1/N)Z^2.

    ``terms`` is a sequence of ``((i, j), m)``: multiplicity ``m`` at the lift
    (i/N, j/N), with i, j arbitrary integers.  Both vanishing conditions
    (sum m = 0 and sum m * lift = 0) are enforced.
    """

    __slots__ = ("level", "terms")

    def __init__(self, level: int, terms: Iterable[tuple[tuple[int, int], int]]):
        merged: dict[tuple[int, int], int] = {}
        for (i, j), m in terms:
            merged[(int(i), int(j))] = merged.get((int(i), int(j)), 0) + int(m)
        self.level = level
        self.terms = tuple(sorted((lift, m) for lift, m in merged.items() if m))
        if sum(m for _, m in self.terms) != 0:
            raise ValueError("divisor combination must have total multiplicity 0")
        si = sum(m * i for (i, _), m in self.terms)
        sj = sum(m * j for (_, j), m in self.terms)
        if si or sj:
            raise ValueError(
                f"weighted sum of lifts is ({Fraction(si, level)}, {Fraction(sj, level)}), not 0"
            )

    def __add__(self, other: "DivisorCombo") -> "DivisorCombo":
        if other.level != self.level:
            raise ValueError("level mismatch")
        return DivisorCombo(self.level, list(self.terms) + list(other.terms))

    def labels(self):
        for (i, j), m in self.terms:
            yield TorsionLabel(i, j, self.level), m

    def lifts(self):
        """(a1, a2, m) as floats, for the lattice oracle."""
        return [(i / self.level, j / self.level, m) for (i, j), m in self.terms]

    def __eq__(self, other):
        return isinstance(other, DivisorCombo) and (self.level, self.terms) == (other.level, other.terms)

    def __hash__(self):
        return hash((self.level, self.terms))

    def __repr__(self):
        body = " + ".join(f"{m}[({i},{j})/{self.level}]" for (i, j), m in self.terms)
        return f"DivisorCombo({body or '0'})"


# ----------------------------------------------------------------- constants
@lru_cache(maxsize=None)
def _bernoulli(n: int) -> Fraction:
    # B_1 = -1/2 convention
    b = [Fraction(1)]
    for m in range(1, n + 1):
        b.append(-sum(math.comb(m + 1, j) * b[j] for j in range(m)) / (m + 1))
    return b[n]


@lru_cache(maxsize=None)
def _stirling2(n: int, k: int) -> int:
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * _stirling2(n - 1, k) + _stirling2(n - 1, k - 1)


def _polylog_neg(s: int, w: CycElt) -> CycElt:
    """Li_{-s}(w) = sum_{r>=1} r^s w^r as a rational function of w (w != 1)."""
    u = w / (CycElt.one(w.level) - w)
    acc = CycElt.zero(w.level)
    p = u
    for j in range(s + 1):
        acc = acc + p * (math.factorial(j) * _stirling2(s + 1, j + 1))
        p = p * u
    return acc


def _constant_term(k: int, i: int, j: int, N: int) -> CycElt:
    if j % N:
        if k == 1:
            return CycElt.rational(N, Fraction(j % N, N) - Fraction(1, 2))
        return CycElt.zero(N)
    if i % N == 0:
        if k % 2:
            return CycElt.zero(N)
        return CycElt.rational(N, -_bernoulli(k) / math.factorial(k))
    w = CycElt.zeta(N, i)
    one = CycElt.one(N)
    if k == 1:
        return (w + one) / ((w - one) * 2)
    sign = -1 if k % 2 else 1
    return _polylog_neg(k - 1, w) * Fraction(sign, math.factorial(k - 1))


@lru_cache(maxsize=256)
def _single(k: int, i: int, j: int, N: int, prec: int) -> QSeries:
    """(2 pi i)^k-normalized row-order expansion, known for q-exponents < prec."""
    i %= N
    j %= N
    P = prec * N
    acc: dict[int, list[int]] = {}

    def add_rows(start: int, sign: int, rot: int):
        e0 = start
        while e0 < P:
            r = 1
            while r * e0 < P:
                vec = acc.setdefault(r * e0, [0] * N)
                vec[(rot * r) % N] += sign * r ** (k - 1)
                r += 1
            e0 += N

    pos = j if j else N
    neg = (N - j) % N or N
    add_rows(pos, -1 if k % 2 else 1, i)
    add_rows(neg, 1, -i)
    fact = math.factorial(k - 1)
    zero = CycElt.zero(N)
    coeffs = [zero] * P
    coeffs[0] = _constant_term(k, i, j, N)
    for e, vec in acc.items():
        coeffs[e] = CycElt._from_raw(N, vec, fact)
    return QSeries(coeffs, val=0, den=N, prec=P, level=N, twopii=k)


def eis_expansion(k: int, alpha: TorsionLabel, prec: int) -> QSeries:
    """Exact expansion of G_{k,alpha}, valid to q^prec (exclusive).

    The result carries ``twopii = k``: stored coefficients are those of
    G_{k,alpha} / (2 pi i)^k.  Allowed for k >= 3, and for k = 1 with alpha != 0.
    """
    if k < 1:
        raise ValueError("weight must be at least 1")
    if k == 2:
        raise ValueError("weight 2 is only available as a difference or a combination")
    if k == 1 and alpha.is_zero:
        raise ValueError("G_1 at alpha = 0 is excluded")
    return _single(k, alpha.i, alpha.j, alpha.level, prec)


def eis_weight2_diff(alpha: TorsionLabel, prec: int) -> QSeries:
    """G_{2,alpha} - G_{2,0}; numerically this is the Weierstrass p-function at alpha."""
    if alpha.is_zero:
        raise ValueError("alpha must be nonzero")
    N = alpha.level
    return _single(2, alpha.i, alpha.j, N, prec) - _single(2, 0, 0, N, prec)


def eis_combo(k: int, D: DivisorCombo, prec: int) -> QSeries:
    """sum_alpha m_alpha G_{k,alpha} for an admissible combination D."""
    if k < 1:
        raise ValueError("weight must be at least 1")
    N = D.level
    total = QSeries.zero(prec * N, den=N, level=N, twopii=k)
    for (i, j), m in D.terms:
        total = total + _single(k, i, j, N, prec) * m
    return total


# --------------------------------------------------------------- level one
def _sigma_table(power: int, n: int) -> list[int]:
    s = [0] * n
    for d in range(1, n):
        dp = d**power
        for m in range(d, n, d):
            s[m] += dp
    return s


def _int_mul(a: Sequence[int], b: Sequence[int], n: int) -> list[int]:
    out = [0] * n
    for i, x in enumerate(a[:n]):
        if x:
            for j, y in enumerate(b[: n - i]):
                out[i + j] += x * y
    return out


def _delta_coeffs(n: int) -> list[int]:
    """Coefficients of Delta/q to length n, via Jacobi's cube identity."""
    eta3 = [0] * n
    m = 0
    while m * (m + 1) // 2 < n:
        eta3[m * (m + 1) // 2] = (-1) ** m * (2 * m + 1)
        m += 1
    return _eta24(eta3, n)


def _eta24(eta3: list[int], n: int) -> list[int]:
    p2 = _int_mul(eta3, eta3, n)
    p4 = _int_mul(p2, p2, n)
    return _int_mul(p4, p4, n)


def level1_series(which: str, prec: int) -> QSeries:
    """E4, E6, Delta or j with integer coefficients, known for exponents < prec."""
    if prec < 1:
        raise ValueError("prec must be at least 1")
    if which == "E4":
        s = _sigma_table(3, prec)
        return QSeries([1] + [240 * x for x in s[1:]], prec=prec)
    if which == "E6":
        s = _sigma_table(5, prec)
        return QSeries([1] + [-504 * x for x in s[1:]], prec=prec)
    if which == "Delta":
        return QSeries(_delta_coeffs(prec - 1), val=1, prec=prec - 1)
    if which == "j":
        n = prec + 1
        s = _sigma_table(3, n)
        e4 = [1] + [240 * x for x in s[1:]]
        e4c = _int_mul(_int_mul(e4, e4, n), e4, n)
        d = _delta_coeffs(n)
        inv = [1] + [0] * (n - 1)
        for m in range(1, n):
            inv[m] = -sum(d[t] * inv[m - t] for t in range(1, m + 1))
        return QSeries(_int_mul(e4c, inv, n), val=-1, prec=n)
    raise ValueError(f"unknown level-one series {which!r}")


# ------------------------------------------------------------------ oracles
class OracleResult(NamedTuple):
    value: complex
    tail: float
    partial: complex


def _check_tau(tau: complex):
    if complex(tau).imag <= 0:
        raise ValueError("tau must lie in the upper half plane")


def _grid(cutoff: int, tau: complex):
    r = np.arange(-cutoff, cutoff + 1)
    m, n = np.meshgrid(r, r, indexing="ij")
    shell = np.maximum(np.abs(m), np.abs(n)).ravel()
    return m.ravel().astype(float), n.ravel().astype(float), shell


def _shell_cumsum(values: np.ndarray, shell: np.ndarray, cutoff: int) -> np.ndarray:
    re = np.bincount(shell, weights=values.real, minlength=cutoff + 1)
    im = np.bincount(shell, weights=values.imag, minlength=cutoff + 1)
    return np.cumsum(re + 1j * im)


def _extrapolate(S: np.ndarray, lo_frac: float = 0.35, order: int = 8) -> complex:
    """Fit S(r) = S_inf + sum_{p=1..order} c_p r^-p on the upper part of the range."""
    R = len(S) - 1
    r = np.arange(max(4, int(R * lo_frac)), R + 1, dtype=float)
    x = r / R
    A = np.stack([x ** (-p) for p in range(order + 1)], axis=1)
    A[:, 0] = 1.0
    y = S[r.astype(int)]
    coef_re = np.linalg.lstsq(A, y.real, rcond=None)[0]
    coef_im = np.linalg.lstsq(A, y.imag, rcond=None)[0]
    return complex(coef_re[0], coef_im[0])


def _finish(S: np.ndarray) -> OracleResult:
    value = _extrapolate(S)
    return OracleResult(value, float(abs(S[-1] - value)), complex(S[-1]))


def lattice_partial_sums(k: int, lifts: Sequence[tuple[float, float, int]], tau: complex,
                         cutoff: int, aspect: int = 1) -> np.ndarray:
    """Cumulative grouped sums over the boxes |m| <= r, |n| <= aspect*r, r = 0..cutoff.

    ``lifts`` holds (a1, a2, m) triples; the inner sum over them is taken
    before the lattice sum.  Points with l + alpha = 0 are omitted.
    """
    tau = complex(tau)
    _check_tau(tau)
    rng_m = np.arange(-cutoff, cutoff + 1)
    rng_n = np.arange(-aspect * cutoff, aspect * cutoff + 1)
    m, n = np.meshgrid(rng_m, rng_n, indexing="ij")
    shell = np.maximum(np.abs(m), -(-np.abs(n) // aspect)).ravel()
    m = m.ravel().astype(float)
    n = n.ravel().astype(float)
    total = np.zeros(m.shape, dtype=complex)
    for a1, a2, mult in lifts:
        z = (m + a1) + (n + a2) * tau
        zero = np.abs(z) < 1e-12
        z[zero] = 1.0
        t = z ** (-k)
        t[zero] = 0.0
        total += mult * t
    return _shell_cumsum(total, shell, cutoff)


def lattice_oracle(k: int, alpha: TorsionLabel | tuple, tau: complex, cutoff: int = 160) -> OracleResult:
    """Square-cutoff lattice sum of (l + alpha)^-k with extrapolation in the cutoff.

    ``value`` is the extrapolated limit, ``partial`` the raw partial sum and
    ``tail`` the estimated truncation error |partial - value|.
    """
    if k < 3:
        raise ValueError("single-offset lattice sums need k >= 3; use lattice_oracle_combo")
    a1, a2 = _alpha_coords(alpha)
    return _finish(lattice_partial_sums(k, [(a1, a2, 1)], tau, cutoff))


def lattice_oracle_combo(k: int, D: DivisorCombo, tau: complex, cutoff: int = 160) -> OracleResult:
    """Grouped lattice sum of sum_alpha m_alpha (l + alpha)^-k (any k >= 1)."""
    if k < 1:
        raise ValueError("weight must be at least 1")
    return _finish(lattice_partial_sums(k, D.lifts(), tau, cutoff))


def _alpha_coords(alpha) -> tuple[float, float]:
    if isinstance(alpha, TorsionLabel):
        return alpha.i / alpha.level, alpha.j / alpha.level
    a1, a2 = alpha
    return float(a1), float(a2)


def weierstrass_p(z: complex, tau: complex, cutoff: int = 160) -> complex:
    """p(z) = z^-2 + sum' [(z+l)^-2 - l^-2] on the lattice Z + Z tau."""
    tau = complex(tau)
    _check_tau(tau)
    m, n, shell = _grid(cutoff, tau)
    ell = m + n * tau
    w = z + ell
    origin = (m == 0) & (n == 0)
    ell[origin] = 1.0
    t = w ** (-2) - ell ** (-2)
    t[origin] = complex(z) ** (-2)
    return _extrapolate(_shell_cumsum(t, shell, cutoff))


def weierstrass_p_prime(z: complex, tau: complex, cutoff: int = 160) -> complex:
    """p'(z) = -2 sum (z+l)^-3."""
    tau = complex(tau)
    _check_tau(tau)
    m, n, shell = _grid(cutoff, tau)
    t = (z + m + n * tau) ** (-3)
    return -2 * _extrapolate(_shell_cumsum(t, shell, cutoff))


def weierstrass_invariants(tau: complex, cutoff: int = 160) -> tuple[complex, complex]:
    """(G4, G6) = (sum' l^-4, sum' l^-6) for the lattice Z + Z tau."""
    return (
        lattice_oracle(4, (0.0, 0.0), tau, cutoff).value,
        lattice_oracle(6, (0.0, 0.0), tau, cutoff).value,
    )
