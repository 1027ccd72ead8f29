"""Exact arithmetic in the cyclotomic fields Q(zeta_N).

Rationals are plain :class:`fractions.Fraction` values.  A :class:`CycElt`
stores an element of Q(zeta_N) in the power basis 1, z, ..., z^(phi(N)-1)
obtained by reducing modulo the N-th cyclotomic polynomial, as an integer
numerator vector over a single positive denominator.  Two elements are equal
iff their canonical vectors agree.
"""

from __future__ import annotations

import cmath
import math
import re
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

Rat = Fraction

__all__ = [
    "Rat",
    "CycElt",
    "cyclotomic_poly",
    "euler_phi",
    "cyc_arith",
    "galois_apply",
    "descend_to_rational",
    "parse_cyc",
    "as_rat",
]


def as_rat(value) -> Fraction:
    """Coerce an int, Fraction or ``"p/q"`` string to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def euler_phi(n: int) -> int:
    result, m, p = n, n, 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


def _poly_divexact(num: list[int], den: list[int]) -> list[int]:
    # exact division of integer polynomials, den monic; coefficients low -> high
    num = list(num)
    dq = len(den) - 1
    out = [0] * (len(num) - dq)
    for i in range(len(num) - 1, dq - 1, -1):
        c = num[i]
        out[i - dq] = c
        if c:
            for j in range(dq + 1):
                num[i - dq + j] -= c * den[j]
    if any(num[:dq]):
        raise ArithmeticError("polynomial division is not exact")
    return out


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Integer coefficients (low degree first) of the n-th cyclotomic polynomial."""
    if n < 1:
        raise ValueError("cyclotomic polynomial needs n >= 1")
    poly = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            poly = _poly_divexact(poly, list(cyclotomic_poly(d)))
    return tuple(poly)


@lru_cache(maxsize=None)
def _units(n: int) -> tuple[int, ...]:
    return tuple(t for t in range(1, n + 1) if math.gcd(t, n) == 1)


def _reduce_poly(level: int, poly: Sequence[int]) -> list[int]:
    """Reduce an integer polynomial in z modulo Phi_level; returns length phi."""
    phi = cyclotomic_poly(level)
    deg = len(phi) - 1
    if len(poly) <= deg:
        return list(poly) + [0] * (deg - len(poly))
    p = list(poly)
    if len(p) > level:
        # fold with z^level = 1 first, cheap and keeps the division short
        folded = [0] * level
        for i, c in enumerate(p):
            folded[i % level] += c
        p = folded
    for i in range(len(p) - 1, deg - 1, -1):
        c = p[i]
        if c:
            base = i - deg
            for j in range(deg):
                p[base + j] -= c * phi[j]
    return p[:deg]


class CycElt:
    """An element of Q(zeta_N) in canonical (reduced power-basis) form.

    ``CycElt(N, coeffs)`` reads ``coeffs`` as sum(c_i * zeta_N**i) for any
    length and any rational-like entries, then reduces.
    """

    __slots__ = ("level", "_num", "_den", "_hash")

    def __init__(self, level: int, coeffs: Iterable = ()):
        if level < 1:
            raise ValueError("cyclotomic level must be positive")
        fracs = [as_rat(c) for c in coeffs]
        den = 1
        for f in fracs:
            den = den * f.denominator // math.gcd(den, f.denominator)
        nums = [f.numerator * (den // f.denominator) for f in fracs]
        self._set(level, _reduce_poly(level, nums), den)

    def _set(self, level, num, den):
        g = math.gcd(den, *num) if num else den
        if g > 1:
            num = [c // g for c in num]
            den //= g
        if not any(num):
            den = 1
        self.level = level
        self._num = tuple(num)
        self._den = den
        self._hash = None

    @classmethod
    def _from_raw(cls, level: int, poly: Sequence[int], den: int = 1) -> "CycElt":
        """Build from an unreduced integer polynomial over a positive denominator."""
        obj = cls.__new__(cls)
        obj._set(level, _reduce_poly(level, poly), den)
        return obj

    @classmethod
    def rational(cls, level: int, value) -> "CycElt":
        r = as_rat(value)
        return cls._from_raw(level, [r.numerator], r.denominator)

    @classmethod
    def zero(cls, level: int) -> "CycElt":
        return cls._from_raw(level, [0])

    @classmethod
    def one(cls, level: int) -> "CycElt":
        return cls._from_raw(level, [1])

    @classmethod
    def zeta(cls, level: int, power: int = 1) -> "CycElt":
        poly = [0] * level
        poly[power % level] = 1
        return cls._from_raw(level, poly)

    # ------------------------------------------------------------------ access
    @property
    def degree(self) -> int:
        return len(self._num)

    @property
    def coeffs(self) -> tuple[Fraction, ...]:
        """Canonical coefficient vector (length phi(N))."""
        return tuple(Fraction(c, self._den) for c in self._num)

    def raw(self) -> tuple[tuple[int, ...], int]:
        return self._num, self._den

    def is_zero(self) -> bool:
        return not any(self._num)

    def __bool__(self) -> bool:
        return any(self._num)

    def is_rational(self) -> bool:
        return not any(self._num[1:])

    def lift(self, level: int) -> "CycElt":
        """Embed into Q(zeta_level) for a multiple ``level`` of the current level."""
        if level == self.level:
            return self
        if level % self.level:
            raise ValueError(f"cannot embed level {self.level} into level {level}")
        step = level // self.level
        poly = [0] * (step * (len(self._num) - 1) + 1) if self._num else [0]
        for i, c in enumerate(self._num):
            poly[i * step] = c
        return CycElt._from_raw(level, poly, self._den)

    def to_complex(self) -> complex:
        w = cmath.exp(2j * math.pi / self.level)
        acc = 0j
        for c in reversed(self._num):
            acc = acc * w + c
        return acc / self._den

    # -------------------------------------------------------------- arithmetic
    def _coerce(self, other) -> "CycElt":
        if isinstance(other, CycElt):
            if other.level != self.level:
                raise ValueError(
                    f"level mismatch: Q(zeta_{self.level}) vs Q(zeta_{other.level})"
                )
            return other
        if isinstance(other, (int, Fraction)):
            return CycElt.rational(self.level, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        d1, d2 = self._den, other._den
        if d1 == d2:
            num = [a + b for a, b in zip(self._num, other._num)]
            den = d1
        else:
            num = [a * d2 + b * d1 for a, b in zip(self._num, other._num)]
            den = d1 * d2
        obj = CycElt.__new__(CycElt)
        obj._set(self.level, num, den)
        return obj

    __radd__ = __add__

    def __neg__(self):
        obj = CycElt.__new__(CycElt)
        obj._set(self.level, [-a for a in self._num], self._den)
        return obj

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self._num, other._num
        if len(a) == 1:
            num = [a[0] * b[0]]
        else:
            num = [0] * (len(a) + len(b) - 1)
            for i, x in enumerate(a):
                if x:
                    for j, y in enumerate(b):
                        num[i + j] += x * y
        return CycElt._from_raw(self.level, num, self._den * other._den)

    __rmul__ = __mul__

    def inverse(self) -> "CycElt":
        if not self:
            raise ZeroDivisionError("inverse of zero in Q(zeta_N)")
        if self.is_rational():
            r = Fraction(self._den, self._num[0])
            return CycElt.rational(self.level, r)
        # product of the non-trivial conjugates, divided by the (rational) norm
        conj = CycElt.one(self.level)
        for t in _units(self.level):
            if t % self.level != 1:
                conj = conj * self.galois(t)
        norm = self * conj
        if not norm.is_rational():
            raise ArithmeticError("norm failed to descend to Q")
        return conj * Fraction(norm._den, norm._num[0])

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result, base = CycElt.one(self.level), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def galois(self, t: int) -> "CycElt":
        """Apply sigma_t : zeta_N -> zeta_N**t."""
        n = self.level
        if math.gcd(t, n) != 1:
            raise ValueError(f"t={t} is not coprime to N={n}")
        poly = [0] * n
        for i, c in enumerate(self._num):
            poly[(i * t) % n] += c
        return CycElt._from_raw(n, poly, self._den)

    # ---------------------------------------------------------------- equality
    def __eq__(self, other):
        if isinstance(other, CycElt):
            return (
                self.level == other.level
                and self._den == other._den
                and self._num == other._num
            )
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and Fraction(self._num[0], self._den) == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.level, self._num, self._den))
        return self._hash

    # ----------------------------------------------------------- serialization
    def __str__(self):
        terms = []
        for i, c in enumerate(self._num):
            if not c:
                continue
            r = Fraction(c, self._den)
            s = str(r)
            if i == 0:
                terms.append(s)
            elif i == 1:
                terms.append(f"{s}*z")
            else:
                terms.append(f"{s}*z^{i}")
        body = " + ".join(terms) if terms else "0"
        return f"{body} (mod {self.level})"

    def __repr__(self):
        return f"CycElt({self})"


_CYC_RE = re.compile(r"^(.*)\(mod\s+(\d+)\)\s*$")
_TERM_RE = re.compile(r"^(-?\d+(?:/\d+)?)(?:\*z(?:\^(\d+))?)?$")


def parse_cyc(text: str) -> CycElt:
    """Inverse of ``str(CycElt)``: ``"c0 + c1*z + c2*z^2 (mod N)"``.

    A bare rational such as ``-120`` or ``3/7`` is accepted as a level-1 element.
    """
    if "(mod" not in text:
        try:
            return CycElt.rational(1, Fraction(text.strip()))
        except ValueError:
            raise ValueError(f"malformed cyclotomic element: {text!r}") from None
    m = _CYC_RE.match(text.strip())
    if not m:
        raise ValueError(f"malformed cyclotomic element: {text!r}")
    body, level = m.group(1).strip(), int(m.group(2))
    poly: dict[int, Fraction] = {}
    if body != "0":
        for term in body.split(" + "):
            tm = _TERM_RE.match(term.strip())
            if not tm:
                raise ValueError(f"malformed term {term!r} in {text!r}")
            if "*z" in term:
                power = int(tm.group(2)) if tm.group(2) else 1
            else:
                power = 0
            poly[power] = poly.get(power, Fraction(0)) + Fraction(tm.group(1))
    size = max(poly, default=0) + 1
    return CycElt(level, [poly.get(i, 0) for i in range(size)])


def cyc_arith(a: CycElt, b: CycElt, op: str) -> CycElt:
    """Dispatch ``add``/``sub``/``mul``/``div``; levels must agree."""
    if a.level != b.level:
        raise ValueError(f"level mismatch: {a.level} vs {b.level}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if not b:
            raise ZeroDivisionError("division by zero in Q(zeta_N)")
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def galois_apply(a: CycElt, t: int) -> CycElt:
    return a.galois(t)


def descend_to_rational(a: CycElt) -> Fraction | None:
    """The rational value of ``a``, or None when ``a`` is not in Q."""
    if not a.is_rational():
        return None
    num, den = a.raw()
    return Fraction(num[0], den)
