"""Truncated expansions in q^(1/N) with exact cyclotomic coefficients.

A :class:`QSeries` stands for

    (2*pi*i)**twopii * sum_{e >= val} c_e * q**(e/den) + O(q**((val+prec)/den))

with ``q = exp(2*pi*i*tau)``.  ``prec`` counts the known coefficients from
``val`` on; ``prec=None`` marks an exact (finite) expansion.  The factor
(2*pi*i)**twopii lets Eisenstein series keep their lattice-sum normalization
while every stored coefficient stays in Q(zeta_level); it is additive under
multiplication and must agree under addition.

Multiplication is a sparse schoolbook convolution, O(nnz(a) * len(b)), with
integer accumulation over a common denominator.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from typing import Iterable, Sequence

from .linalg import left_kernel, rref
from .numtower import CycElt, as_rat, parse_cyc

__all__ = [
    "QSeries",
    "PrecisionError",
    "series_arith",
    "series_substitute",
    "series_eval_float",
    "series_eval_mp",
    "echelon_basis",
    "dump_series",
    "load_series",
]


class PrecisionError(ValueError):
    """Raised when a computation needs more known coefficients than supplied."""


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def _to_cyc(c, level: int) -> CycElt:
    if isinstance(c, CycElt):
        return c.lift(level)
    return CycElt.rational(level, c)


class QSeries:
    __slots__ = ("den", "val", "coeffs", "prec", "level", "twopii")

    def __init__(
        self,
        coeffs: Iterable = (),
        val: int = 0,
        den: int = 1,
        prec: int | None = None,
        level: int | None = None,
        twopii: int = 0,
    ):
        coeffs = list(coeffs)
        if level is None:
            level = 1
            for c in coeffs:
                if isinstance(c, CycElt):
                    level = _lcm(level, c.level)
        if den < 1:
            raise ValueError("exponent denominator must be positive")
        if prec is not None:
            if prec < 0:
                raise ValueError("precision must be nonnegative")
            if len(coeffs) > prec:
                coeffs = coeffs[:prec]
            else:
                coeffs = coeffs + [0] * (prec - len(coeffs))
        cs = [_to_cyc(c, level) for c in coeffs]
        # tight valuation
        lead = next((i for i, c in enumerate(cs) if c), None)
        if lead is None:
            if prec is None:
                val, cs = 0, []
            else:
                val, cs, prec = val + prec, [], 0
        else:
            val += lead
            cs = cs[lead:]
            if prec is None:
                while cs and not cs[-1]:
                    cs.pop()
            else:
                prec -= lead
        self.den = den
        self.val = val
        self.coeffs = tuple(cs)
        self.prec = prec
        self.level = level
        self.twopii = twopii

    # ------------------------------------------------------------ constructors
    @classmethod
    def _make(cls, coeffs, val, den, prec, level, twopii):
        return cls(coeffs, val=val, den=den, prec=prec, level=level, twopii=twopii)

    @classmethod
    def monomial(cls, coeff=1, exponent: int = 0, den: int = 1, prec=None, level=None):
        """``coeff * q**(exponent/den)``; ``prec`` is an absolute precision if given."""
        rel = None if prec is None else prec - exponent
        return cls([coeff], val=exponent, den=den, prec=rel, level=level)

    @classmethod
    def zero(cls, abs_prec: int | None = None, den: int = 1, level: int = 1, twopii: int = 0):
        if abs_prec is None:
            return cls([], den=den, level=level, twopii=twopii)
        return cls([], val=abs_prec, den=den, prec=0, level=level, twopii=twopii)

    # --------------------------------------------------------------- accessors
    @property
    def abs_prec(self) -> int | None:
        return None if self.prec is None else self.val + self.prec

    def is_exact(self) -> bool:
        return self.prec is None

    def is_zero(self) -> bool:
        """True if every known coefficient vanishes."""
        return not self.coeffs

    def __len__(self):
        return len(self.coeffs)

    def coeff(self, e: int) -> CycElt:
        """Coefficient of q**(e/den); raises if e is beyond the known range."""
        if self.prec is not None and e >= self.val + self.prec:
            raise PrecisionError(f"coefficient {e}/{self.den} is beyond the precision")
        i = e - self.val
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return CycElt.zero(self.level)

    def items(self):
        """(exponent numerator, coefficient) for nonzero coefficients."""
        for i, c in enumerate(self.coeffs):
            if c:
                yield self.val + i, c

    def lead(self) -> CycElt:
        if not self.coeffs:
            raise ValueError("zero series has no leading coefficient")
        return self.coeffs[0]

    # ------------------------------------------------------------- conversions
    def with_den(self, den: int) -> "QSeries":
        if den == self.den:
            return self
        if den % self.den:
            raise ValueError(f"cannot refine denominator {self.den} to {den}")
        f = den // self.den
        zero = CycElt.zero(self.level)
        cs = []
        for i, c in enumerate(self.coeffs):
            if i:
                cs.extend([zero] * (f - 1))
            cs.append(c)
        prec = None if self.prec is None else self.prec * f
        return QSeries._make(cs, self.val * f, den, prec, self.level, self.twopii)

    def with_level(self, level: int) -> "QSeries":
        if level == self.level:
            return self
        return QSeries._make(
            [c.lift(level) for c in self.coeffs], self.val, self.den, self.prec, level, self.twopii
        )

    def compress(self) -> "QSeries":
        """Use the coarsest exponent denominator that represents the series exactly."""
        g = self.den
        for e, _ in self.items():
            g = math.gcd(g, e)
        if self.prec is not None:
            g = math.gcd(g, self.val + self.prec)
        if g <= 1:
            return self
        cs = [self.coeff(e) for e in range(self.val, self.val + len(self.coeffs), g)]
        prec = None if self.prec is None else (self.prec + g - 1) // g
        return QSeries._make(cs, self.val // g, self.den // g, prec, self.level, self.twopii)

    def truncate(self, abs_prec: int) -> "QSeries":
        """Forget coefficients at exponents >= abs_prec (in units of 1/den)."""
        if self.abs_prec is not None and abs_prec >= self.abs_prec:
            return self
        if abs_prec <= self.val:
            return QSeries.zero(abs_prec, self.den, self.level, self.twopii)
        n = abs_prec - self.val
        return QSeries._make(self.coeffs[:n], self.val, self.den, n, self.level, self.twopii)

    def map_coeffs(self, fn) -> "QSeries":
        cs = [fn(c) for c in self.coeffs]
        level = cs[0].level if cs else self.level
        return QSeries._make(cs, self.val, self.den, self.prec, level, self.twopii)

    def galois(self, t: int) -> "QSeries":
        return self.map_coeffs(lambda c: c.galois(t))

    def descend(self) -> "QSeries":
        """Move all coefficients down to Q; raises if one is irrational."""
        out = []
        for c in self.coeffs:
            if not c.is_rational():
                raise ArithmeticError(f"coefficient {c} is not rational")
            num, den = c.raw()
            out.append(Fraction(num[0], den))
        return QSeries._make(out, self.val, self.den, self.prec, 1, self.twopii)

    # -------------------------------------------------------------- arithmetic
    @staticmethod
    def _align(a: "QSeries", b: "QSeries"):
        den = _lcm(a.den, b.den)
        level = _lcm(a.level, b.level)
        return a.with_den(den).with_level(level), b.with_den(den).with_level(level)

    def _coerce(self, other):
        if isinstance(other, QSeries):
            return other
        if isinstance(other, (int, Fraction, CycElt)):
            lvl = self.level if not isinstance(other, CycElt) else _lcm(self.level, other.level)
            return QSeries([other], den=self.den, level=lvl, twopii=self.twopii)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = QSeries._align(self, other)
        if a.twopii != b.twopii and a.coeffs and b.coeffs:
            raise ValueError(
                f"cannot add series scaled by (2 pi i)^{a.twopii} and (2 pi i)^{b.twopii}"
            )
        tp = a.twopii if a.coeffs else b.twopii
        absp = _min_prec(a.abs_prec, b.abs_prec)
        starts = [s.val for s in (a, b) if s.coeffs]
        if not starts:
            return QSeries.zero(absp, a.den, a.level, tp)
        start = min(starts)
        end = max(s.val + len(s.coeffs) for s in (a, b) if s.coeffs)
        if absp is not None:
            end = absp
        if end <= start:
            return QSeries.zero(absp, a.den, a.level, tp)
        acc = [CycElt.zero(a.level)] * (end - start)
        for s in (a, b):
            for e, c in s.items():
                if e < end:
                    acc[e - start] = acc[e - start] + c
        prec = None if absp is None else absp - start
        return QSeries._make(acc, start, a.den, prec, a.level, tp)

    __radd__ = __add__

    def __neg__(self):
        return self.map_coeffs(lambda c: -c)

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

    def scale(self, c) -> "QSeries":
        """Multiply every coefficient by a constant (rational or CycElt)."""
        if isinstance(c, CycElt):
            level = _lcm(self.level, c.level)
            s = self.with_level(level)
            cc = c.lift(level)
            return s.map_coeffs(lambda x: x * cc) if s.coeffs else s
        r = as_rat(c)
        return self.map_coeffs(lambda x: x * r)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, CycElt)):
            return self.scale(other)
        if not isinstance(other, QSeries):
            return NotImplemented
        return _series_mul(*QSeries._align(self, other))

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, CycElt)):
            return self.scale(other)
        return NotImplemented

    def shift(self, e: int) -> "QSeries":
        """Multiply by q**(e/den)."""
        return QSeries._make(self.coeffs, self.val + e, self.den, self.prec, self.level, self.twopii)

    def invert(self, prec: int | None = None) -> "QSeries":
        """Multiplicative inverse.

        Exact non-monomial input has an infinite inverse; pass ``prec`` (the
        number of coefficients wanted) in that case.
        """
        if not self.coeffs:
            raise ZeroDivisionError("cannot invert a series whose known part is zero")
        rel = self.prec
        if rel is None:
            if len(self.coeffs) == 1:
                return QSeries._make(
                    [self.coeffs[0].inverse()], -self.val, self.den, None, self.level, -self.twopii
                )
            if prec is None:
                raise PrecisionError("inverse of an exact series needs an explicit prec")
            rel = prec
        c = list(self.coeffs[:rel]) + [CycElt.zero(self.level)] * max(0, rel - len(self.coeffs))
        b0 = c[0].inverse()
        b = [b0]
        for n in range(1, rel):
            acc = CycElt.zero(self.level)
            for i in range(1, min(n, len(self.coeffs) - 1) + 1):
                if c[i]:
                    acc = acc + c[i] * b[n - i]
            b.append(-(acc * b0))
        return QSeries._make(b, -self.val, self.den, rel, self.level, -self.twopii)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(Fraction(1) / as_rat(other))
        if isinstance(other, CycElt):
            return self.scale(other.inverse())
        if isinstance(other, QSeries):
            return self * other.invert()
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            return self.invert() ** (-k)
        result = QSeries([1], den=self.den, level=self.level)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # ---------------------------------------------------------------- equality
    def __eq__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        return (
            self.den == other.den
            and self.val == other.val
            and self.prec == other.prec
            and self.level == other.level
            and self.twopii == other.twopii
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.den, self.val, self.prec, self.level, self.twopii, self.coeffs))

    def __repr__(self):
        terms = []
        for e, c in list(self.items())[:6]:
            terms.append(f"({c})q^({e}/{self.den})")
        tail = "exact" if self.prec is None else f"O(q^({self.abs_prec}/{self.den}))"
        scale = f"(2pi i)^{self.twopii} * " if self.twopii else ""
        return f"QSeries[{scale}{' + '.join(terms) or '0'} ... {tail}]"


def _min_prec(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _common_den_vectors(s: QSeries):
    den = 1
    for c in s.coeffs:
        d = c.raw()[1]
        den = den * d // math.gcd(den, d)
    vecs = []
    for i, c in enumerate(s.coeffs):
        num, d = c.raw()
        if any(num):
            f = den // d
            vecs.append((i, tuple(x * f for x in num)))
    return vecs, den


def _series_mul(a: QSeries, b: QSeries) -> QSeries:
    level, den = a.level, a.den
    val = a.val + b.val
    rel = _min_prec(a.prec, b.prec)
    tp = a.twopii + b.twopii
    if not a.coeffs or not b.coeffs:
        if rel is None:
            return QSeries.zero(None, den, level, tp)
        return QSeries.zero(val + rel, den, level, tp)
    full = len(a.coeffs) + len(b.coeffs) - 1
    length = full if rel is None else min(rel, full)
    va, da = _common_den_vectors(a)
    vb, db = _common_den_vectors(b)
    if len(va) > len(vb):
        va, vb = vb, va
    if level == 1:
        acc = [0] * length
        for i, (x,) in va:
            for j, (y,) in vb:
                n = i + j
                if n >= length:
                    break
                acc[n] += x * y
        total = da * db
        cs = [CycElt._from_raw(1, [v], total) for v in acc]
    else:
        width = len(va[0][1]) * 2 - 1
        acc = [None] * length
        for i, x in va:
            for j, y in vb:
                n = i + j
                if n >= length:
                    break
                row = acc[n]
                if row is None:
                    row = acc[n] = [0] * width
                for p, xp in enumerate(x):
                    if xp:
                        for q, yq in enumerate(y):
                            if yq:
                                row[p + q] += xp * yq
        total = da * db
        zero = CycElt.zero(level)
        cs = [zero if r is None else CycElt._from_raw(level, r, total) for r in acc]
    prec = None if rel is None else rel
    return QSeries._make(cs, val, den, prec, level, tp)


def series_arith(a: QSeries, b: QSeries | int | None, op: str) -> QSeries:
    """``add``, ``sub``, ``mul``, ``pow`` (b is the exponent) or ``invert`` (b unused)."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "pow":
        return a ** int(b)
    if op == "invert":
        return a.invert()
    raise ValueError(f"unknown series operation {op!r}")


def series_substitute(s: QSeries, a: int, b: int, d: int) -> QSeries:
    """Apply tau -> (a*tau + b)/d, i.e. q -> zeta_d**b * q**(a/d).

    The term c*q**(n/D) becomes c * zeta_(dD)**(b*n) * q**(n*a/(dD)); for the
    j-function this reproduces j((a tau + b)/d) = zeta_d**(-b) q**(-a/d) + ...
    """
    if a < 1 or d < 1:
        raise ValueError("substitution needs a >= 1 and d >= 1")
    new_den = d * s.den
    twist = b % new_den != 0
    level = _lcm(s.level, new_den) if twist else s.level
    lo = s.val * a
    prec = None if s.prec is None else s.prec * a
    if not s.coeffs:
        return QSeries.zero(None if prec is None else lo + prec, new_den, level, s.twopii)
    zero = CycElt.zero(level)
    cs = [zero] * ((len(s.coeffs) - 1) * a + 1)
    for n, c in s.items():
        c = c.lift(level)
        if twist:
            c = c * CycElt.zeta(new_den, b * n).lift(level)
        cs[(n - s.val) * a] = c
    return QSeries(cs, val=lo, den=new_den, prec=prec, level=level, twopii=s.twopii)


def _check_tau(tau):
    if complex(tau).imag <= 0:
        raise ValueError("tau must lie in the upper half plane")


def series_eval_float(s: QSeries, tau: complex) -> complex:
    """Partial sum of the expansion at tau, in complex double precision."""
    tau = complex(tau)
    _check_tau(tau)
    x = cmath.exp(2j * math.pi * tau / s.den)
    acc = 0j
    for e, c in s.items():
        acc += c.to_complex() * x**e
    if s.twopii:
        acc *= (2j * math.pi) ** s.twopii
    return acc


def series_eval_mp(s: QSeries, tau, dps: int = 50):
    """Same as :func:`series_eval_float` in mpmath multiprecision."""
    import mpmath

    with mpmath.workdps(dps):
        tau = mpmath.mpc(tau)
        if tau.imag <= 0:
            raise ValueError("tau must lie in the upper half plane")
        x = mpmath.exp(2j * mpmath.pi * tau / s.den)
        w = mpmath.exp(2j * mpmath.pi / s.level)
        acc = mpmath.mpc(0)
        for e, c in s.items():
            num, den = c.raw()
            v = mpmath.mpc(0)
            for i in range(len(num) - 1, -1, -1):
                v = v * w + num[i]
            acc += v / den * x**e
        if s.twopii:
            acc *= (2j * mpmath.pi) ** s.twopii
        return +acc


def echelon_basis(rows: Sequence[QSeries], min_window: int | None = None):
    """Row-reduce q-expansions.

    Returns ``(basis, relations)``: the reduced echelon basis (strictly
    increasing valuations, leading coefficient 1) of the span, and a basis of
    the exact linear relations among the inputs.  ``min_window`` is the number
    of coefficients the caller needs compared; a shorter common window raises
    :class:`PrecisionError`.
    """
    rows = list(rows)
    if not rows:
        return [], []
    den = 1
    level = 1
    for r in rows:
        den = _lcm(den, r.den)
        level = _lcm(level, r.level)
    tps = {r.twopii for r in rows if r.coeffs}
    if len(tps) > 1:
        raise ValueError("rows mix different (2 pi i) scalings")
    tp = tps.pop() if tps else rows[0].twopii
    rows = [r.with_den(den).with_level(level) for r in rows]
    start = min((r.val for r in rows if r.coeffs), default=0)
    finite = [r.abs_prec for r in rows if r.abs_prec is not None]
    if finite:
        end = min(finite)
    else:
        end = max(r.val + len(r.coeffs) for r in rows)
    stored_below = [r for r in rows if r.coeffs and r.val < start]
    assert not stored_below
    width = end - start
    if width <= 0 or (min_window is not None and width < min_window):
        raise PrecisionError(
            f"common precision window has {max(width, 0)} coefficients"
            + (f", need {min_window}" if min_window is not None else "")
        )
    zero, one = CycElt.zero(level), CycElt.one(level)
    matrix = []
    for r in rows:
        matrix.append([r.coeff(e) if e < (r.abs_prec or end + 1) else zero for e in range(start, end)])
    red, pivots = rref(matrix)
    basis = [
        QSeries(row, val=start, den=den, prec=width, level=level, twopii=tp) for row in red
    ]
    relations = left_kernel(matrix, zero, one)
    return basis, relations


# ------------------------------------------------------------------ file format
def _fmt_prec(s: QSeries) -> str:
    return "exact" if s.prec is None else str(s.prec)


def dump_series(named: Sequence[tuple[str, QSeries]], header: dict | None = None) -> str:
    """Serialize series in the text block format (exact round trip)."""
    lines = []
    for key, value in (header or {}).items():
        lines.append(f"# {key}: {value}")
    for name, s in named:
        extra = ""
        if s.twopii:
            extra += f" W2PI={s.twopii}"
        if not s.coeffs and s.level != 1:
            extra += f" LEVEL={s.level}"
        lines.append(f"SERIES {name} N={s.den} VAL={s.val} PREC={_fmt_prec(s)}{extra}")
        for i, c in enumerate(s.coeffs):
            lines.append(f"{s.val + i}/{s.den} : {c}")
        lines.append("END")
    return "\n".join(lines) + "\n"


def load_series(text: str):
    """Parse the block format; returns ``(list of (name, QSeries), header dict)``."""
    header: dict[str, str] = {}
    out: list[tuple[str, QSeries]] = []
    cur = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if ":" in line and cur is None:
                k, v = line[1:].split(":", 1)
                header[k.strip()] = v.strip()
            continue
        if line.startswith("SERIES"):
            if cur is not None:
                raise ValueError(f"line {lineno}: SERIES inside an open block")
            parts = line.split()
            if len(parts) < 5:
                raise ValueError(f"line {lineno}: malformed SERIES header")
            fields = dict(p.split("=", 1) for p in parts[2:])
            try:
                cur = {
                    "name": parts[1],
                    "den": int(fields["N"]),
                    "val": int(fields["VAL"]),
                    "prec": None if fields["PREC"] == "exact" else int(fields["PREC"]),
                    "twopii": int(fields.get("W2PI", 0)),
                    "level": int(fields["LEVEL"]) if "LEVEL" in fields else None,
                    "terms": {},
                }
            except (KeyError, ValueError) as exc:
                raise ValueError(f"line {lineno}: malformed SERIES header ({exc})") from None
            continue
        if line == "END":
            if cur is None:
                raise ValueError(f"line {lineno}: END without SERIES")
            terms = cur["terms"]
            level = cur["level"] or 1
            for c in terms.values():
                level = _lcm(level, c.level)
            if terms:
                lo = min(terms)
                hi = max(terms) + 1
                zero = CycElt.zero(level)
                cs = [terms.get(e, zero).lift(level) for e in range(lo, hi)]
                val = lo
            else:
                cs, val = [], cur["val"]
            prec = cur["prec"]
            if prec is not None:
                prec = prec - (val - cur["val"])
            s = QSeries(cs, val=val, den=cur["den"], prec=prec, level=level, twopii=cur["twopii"])
            if s.val != cur["val"] and s.coeffs:
                raise ValueError(f"series {cur['name']}: VAL does not match its leading term")
            out.append((cur["name"], s))
            cur = None
            continue
        if cur is None:
            raise ValueError(f"line {lineno}: coefficient line outside a SERIES block")
        try:
            exp_part, coef_part = line.split(":", 1)
            num, den = exp_part.strip().split("/")
            if int(den) != cur["den"]:
                raise ValueError("exponent denominator disagrees with N")
            cur["terms"][int(num)] = parse_cyc(coef_part)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if cur is not None:
        raise ValueError("unterminated SERIES block")
    return out, header
