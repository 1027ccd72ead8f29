"""Divisor functions on y^2 = x^3 + a x + b and their expansions at the origin.

Everything here works over any field of characteristic 0 whose elements
support + - * /: exact rationals (Fraction) or complex floats for the
numerical bridge to lattice sums.  Laurent expansions at O use the analytic
uniformizer z with dz = dx / 2y, normalized so x = z^-2 + ..., y = -z^-3 + ...
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

__all__ = [
    "Laurent",
    "EllCurveQ",
    "CurvePoint",
    "O",
    "PointDivisor",
    "FormalExpansion",
    "DivisorFunction",
    "formal_weierstrass_expansion",
    "divisor_function",
    "katz_coefficients",
    "slope_identities",
    "numeric_period_bridge",
    "p_laurent_coefficients",
]


def _is_exact(v) -> bool:
    return isinstance(v, (int, Fraction))


def _field(v):
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    return v


# ------------------------------------------------------------------- Laurent
class Laurent:
    """Truncated Laurent series sum_{i} c[i] z^(val+i) + O(z^(val+len(c)))."""

    __slots__ = ("val", "c")

    def __init__(self, coeffs: Sequence, val: int = 0):
        self.c = list(coeffs)
        self.val = val

    @property
    def prec(self) -> int:
        """Absolute precision: coefficients are known for exponents < prec."""
        return self.val + len(self.c)

    def __getitem__(self, e: int):
        i = e - self.val
        if i >= len(self.c):
            raise IndexError(f"z^{e} is beyond the precision")
        return self.c[i] if i >= 0 else 0

    def normalized(self, tol: float = 0.0) -> "Laurent":
        """Drop leading zeros (|c| <= tol counts as zero in float mode)."""
        i = 0
        while i < len(self.c) and (self.c[i] == 0 or (tol and abs(self.c[i]) <= tol)):
            i += 1
        return Laurent(self.c[i:], self.val + i)

    def __add__(self, other):
        if not isinstance(other, Laurent):
            # scalar: only the constant term changes
            if other == 0 or self.prec <= 0:
                return self
            lo = min(self.val, 0)
            out = [0] * (self.prec - lo)
            for k, v in enumerate(self.c):
                out[self.val - lo + k] = v
            out[-lo] = out[-lo] + other
            return Laurent(out, lo)
        lo = min(self.val, other.val)
        hi = min(self.prec, other.prec)
        out = [0] * max(0, hi - lo)
        for s in (self, other):
            for i, v in enumerate(s.c):
                e = s.val + i
                if e < hi:
                    out[e - lo] = out[e - lo] + v
        return Laurent(out, lo)

    __radd__ = __add__

    def __neg__(self):
        return Laurent([-v for v in self.c], self.val)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Laurent):
            return Laurent([v * other for v in self.c], self.val)
        n = min(len(self.c), len(other.c))
        out = [0] * n
        for i in range(n):
            a = self.c[i]
            if a == 0:
                continue
            for j in range(n - i):
                out[i + j] = out[i + j] + a * other.c[j]
        return Laurent(out, self.val + other.val)

    __rmul__ = __mul__

    def inverse(self) -> "Laurent":
        s = self
        if not s.c or s.c[0] == 0:
            raise ZeroDivisionError("leading coefficient is zero")
        n = len(s.c)
        inv0 = 1 / s.c[0] if not _is_exact(s.c[0]) else Fraction(1) / s.c[0]
        b = [inv0]
        for m in range(1, n):
            acc = 0
            for i in range(1, m + 1):
                acc = acc + s.c[i] * b[m - i]
            b.append(-acc * inv0)
        return Laurent(b, -s.val)

    def __truediv__(self, other):
        if isinstance(other, Laurent):
            return self * other.inverse()
        return self * (Fraction(1) / other if _is_exact(other) else 1 / other)

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = Laurent([self.c[0] ** 0] + [0] * (len(self.c) - 1), 0)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def derivative(self) -> "Laurent":
        out = [v * (self.val + i) for i, v in enumerate(self.c)]
        if self.val == 0 and out:
            return Laurent(out[1:], 0)
        return Laurent(out, self.val - 1)

    def integral(self) -> "Laurent":
        """Antiderivative with zero constant; needs no z^-1 term."""
        out = []
        for i, v in enumerate(self.c):
            e = self.val + i
            if e == -1:
                if v != 0:
                    raise ValueError("series has a residue")
                out.append(0)
            else:
                out.append(Fraction(v) / (e + 1) if _is_exact(v) else v / (e + 1))
        return Laurent(out, self.val + 1)

    def compose(self, t: "Laurent") -> "Laurent":
        """self(t(z)) for t = c1 z + ... with c1 != 0."""
        if t.val != 1 or not t.c or t.c[0] == 0:
            raise ValueError("inner series must have valuation exactly 1")
        n = len(self.c)
        tn = Laurent(t.c[:n], 1)
        base = tn ** self.val if self.val else Laurent([1] + [0] * (n - 1), 0)
        # Horner in t on the regular part
        acc = Laurent([0] * n, 0)
        power = Laurent([1] + [0] * (n - 1), 0)
        for v in self.c:
            if v != 0:
                acc = acc + power * v
            power = power * tn
        return (acc * base).truncated(self.val + n)

    def truncated(self, prec: int) -> "Laurent":
        if prec >= self.prec:
            return self
        return Laurent(self.c[: max(0, prec - self.val)], self.val)

    def revert(self) -> "Laurent":
        """Compositional inverse of a series z = c1 t + c2 t^2 + ...."""
        if self.val != 1 or self.c[0] == 0:
            raise ValueError("reversion needs valuation exactly 1")
        n = len(self.c)
        c1 = self.c[0]
        inv1 = Fraction(1) / c1 if _is_exact(c1) else 1 / c1
        t = Laurent([inv1] + [0] * (n - 1), 1)
        for m in range(2, n + 1):
            err = self.compose(t)[m]
            coeffs = list(t.c)
            coeffs[m - 1] = coeffs[m - 1] - err * inv1
            t = Laurent(coeffs, 1)
        return t

    def __repr__(self):
        terms = [f"({v})z^{self.val + i}" for i, v in enumerate(self.c) if v != 0][:8]
        return f"Laurent[{' + '.join(terms) or '0'} + O(z^{self.prec})]"


# --------------------------------------------------------------------- curve
@dataclass(frozen=True)
class CurvePoint:
    """Affine point (x, y), or the origin when ``x`` is None."""

    x: object = None
    y: object = None

    @property
    def is_origin(self) -> bool:
        return self.x is None

    def __repr__(self):
        return "O" if self.is_origin else f"({self.x}, {self.y})"


O = CurvePoint()


class EllCurveQ:
    """y^2 = x^3 + a x + b over Q (Fractions) or C (complex floats, ``tol`` > 0)."""

    def __init__(self, a, b, tol: float = 0.0):
        self.a = _field(a)
        self.b = _field(b)
        self.exact = _is_exact(self.a) and _is_exact(self.b) and not tol
        self.tol = 0.0 if self.exact else (tol or 1e-9)
        disc = -16 * (4 * self.a**3 + 27 * self.b**2)
        if self._is0(disc, scale=1 + abs(self.a) ** 3 + abs(self.b) ** 2):
            raise ValueError("singular curve")

    def __repr__(self):
        return f"EllCurveQ(y^2 = x^3 + ({self.a})x + ({self.b}))"

    def _is0(self, v, scale=1.0) -> bool:
        if self.exact:
            return v == 0
        return abs(v) <= self.tol * max(1.0, abs(scale))

    def _eq(self, u, v) -> bool:
        return self._is0(u - v, scale=max(abs(u), abs(v)))

    def point(self, x, y) -> CurvePoint:
        x, y = _field(x), _field(y)
        P = CurvePoint(x, y)
        if not self.contains(P):
            raise ValueError(f"{P} is not on {self}")
        return P

    def contains(self, P: CurvePoint) -> bool:
        if P.is_origin:
            return True
        lhs = P.y * P.y
        rhs = P.x**3 + self.a * P.x + self.b
        return self._eq(lhs, rhs)

    def neg(self, P: CurvePoint) -> CurvePoint:
        return P if P.is_origin else CurvePoint(P.x, -P.y)

    def same(self, P: CurvePoint, Q: CurvePoint) -> bool:
        if P.is_origin or Q.is_origin:
            return P.is_origin and Q.is_origin
        return self._eq(P.x, Q.x) and self._eq(P.y, Q.y)

    def chord(self, P: CurvePoint, Q: CurvePoint):
        """(lambda, mu) of the line through P and Q (tangent if equal), or None if vertical."""
        if self._eq(P.x, Q.x):
            if not self._eq(P.y, Q.y) or self._is0(P.y, scale=abs(P.x) + 1):
                return None
            lam = (3 * P.x * P.x + self.a) / (2 * P.y)
        else:
            lam = (Q.y - P.y) / (Q.x - P.x)
        mu = P.y - lam * P.x
        return lam, mu

    def add(self, P: CurvePoint, Q: CurvePoint) -> CurvePoint:
        if P.is_origin:
            return Q
        if Q.is_origin:
            return P
        ch = self.chord(P, Q)
        if ch is None:
            return O
        lam, mu = ch
        x3 = lam * lam - P.x - Q.x
        return CurvePoint(x3, -(lam * x3 + mu))

    def mul(self, n: int, P: CurvePoint) -> CurvePoint:
        R = O
        if n < 0:
            n, P = -n, self.neg(P)
        while n:
            if n & 1:
                R = self.add(R, P)
            P = self.add(P, P)
            n >>= 1
        return R


class PointDivisor:
    """sum m_P [P]; must have degree 0 and sum to O (i.e. be principal)."""

    def __init__(self, E: EllCurveQ, terms: Iterable[tuple[CurvePoint, int]]):
        self.E = E
        merged: list[list] = []
        for P, m in terms:
            if not E.contains(P):
                raise ValueError(f"{P} is not on the curve")
            for entry in merged:
                if E.same(entry[0], P):
                    entry[1] += m
                    break
            else:
                merged.append([P, m])
        self.terms = [(P, m) for P, m in merged if m]
        if sum(m for _, m in self.terms):
            raise ValueError("divisor has nonzero degree")
        S = O
        for P, m in self.terms:
            S = E.add(S, E.mul(m, P))
        if not S.is_origin:
            raise ValueError(f"divisor is not principal: points sum to {S}")

    @property
    def origin_multiplicity(self) -> int:
        return sum(m for P, m in self.terms if P.is_origin)

    def __repr__(self):
        return " + ".join(f"{m}[{P}]" for P, m in self.terms) or "0"


# --------------------------------------------------------- formal expansion
@dataclass
class FormalExpansion:
    xz: Laurent
    yz: Laurent
    prec: int
    a: object
    b: object

    def check(self) -> dict:
        """Residuals of the curve equation and of dz = dx / 2y, coefficientwise."""
        x, y = self.xz, self.yz
        lhs = y * y
        rhs = x * x * x + x * self.a + self.b
        curve = (lhs - rhs)
        omega = x.derivative() / (y * 2) - 1
        def worst(s):
            return max((abs(v) for v in s.c), default=0)
        return {"curve": worst(curve), "omega": worst(omega),
                "curve_prec": curve.prec, "omega_prec": omega.prec}


def formal_weierstrass_expansion(E: EllCurveQ, prec: int = 12) -> FormalExpansion:
    """x(z), y(z) at O, each known to ``prec`` coefficients past the pole.

    Starts from t = x/y, w = 1/y with w = t^3 + a t w^2 + b w^3, then
    reparametrizes by z = integral of dx/2y.
    """
    if prec < 4:
        raise ValueError("prec must be at least 4")
    n = prec + 4
    one = Fraction(1) if E.exact else 1.0
    zero = 0 * one
    # w(t) = t^3 (1 + ...): iterate to a fixed point
    w = Laurent([zero] * 3 + [one] + [zero] * (n - 1), 0)
    t = Laurent([zero, one] + [zero] * (n + 2), 0)
    for _ in range(n):
        w_new = (t ** 3 + t * w * w * E.a + w * w * w * E.b).truncated(n + 3)
        if all(u == v for u, v in zip(w_new.c, w.c)) and E.exact:
            break
        w = w_new
    # W = w / t^3 = 1 + ...
    W = Laurent(w.c[3 : 3 + n], 0)
    Winv = W.inverse()
    x = Laurent(Winv.c, -2)  # t / w
    y = Laurent(Winv.c, -3)  # 1 / w
    omega = x.derivative() / (y * 2)
    z_of_t = omega.integral()
    t_of_z = z_of_t.revert()
    xz = x.compose(t_of_z).truncated(prec - 2)
    yz = y.compose(t_of_z).truncated(prec - 3)
    return FormalExpansion(xz, yz, prec, E.a, E.b)


def p_laurent_coefficients(a, b, n: int) -> list:
    """c_1..c_n with p(z) = z^-2 + sum_k c_k z^(2k-2), via the standard recursion."""
    c = [None, 0, -Fraction(1, 5) * a if _is_exact(a) else -a / 5,
         -Fraction(1, 7) * b if _is_exact(b) else -b / 7]
    for k in range(4, n + 1):
        s = sum(c[m] * c[k - m] for m in range(2, k - 1))
        c.append(s * Fraction(3, (2 * k + 1) * (k - 3)) if _is_exact(s) else s * 3 / ((2 * k + 1) * (k - 3)))
    return c[1 : n + 1]


# --------------------------------------------------------- divisor function
class DivisorFunction:
    """phi_D as a product of line and vertical factors with integer exponents.

    Factors are ``("line", lam, mu, e)`` for (y - lam x - mu)^e and
    ``("vert", c, None, e)`` for (x - c)^e.
    """

    def __init__(self, E: EllCurveQ, D: PointDivisor, factors):
        self.E = E
        self.D = D
        self.factors = list(factors)

    def _factor_value(self, f, x, y):
        kind, p, q, _ = f
        return y - p * x - q if kind == "line" else x - p

    def __call__(self, P: CurvePoint):
        if P.is_origin:
            raise ValueError("evaluate at O through the Laurent expansion")
        val = 1
        for f in self.factors:
            v = self._factor_value(f, P.x, P.y)
            if self.E._is0(v, scale=abs(P.x) + abs(P.y) + 1):
                raise ZeroDivisionError(f"factor vanishes at {P}")
            val = val * v ** f[3]
        return val

    def factor_series(self, F: FormalExpansion):
        for f in self.factors:
            yield self._factor_value(f, F.xz, F.yz), f[3]

    def laurent(self, F: FormalExpansion) -> Laurent:
        tol = 0.0 if self.E.exact else 1e-12
        out = None
        for s, e in self.factor_series(F):
            s = s.normalized(tol)
            term = s ** e
            out = term if out is None else out * term
        if out is None:
            return Laurent([Fraction(1) if self.E.exact else 1.0] + [0] * (F.prec - 1), 0)
        return out

    def log_derivative(self, F: FormalExpansion) -> Laurent:
        tol = 0.0 if self.E.exact else 1e-12
        out = None
        for s, e in self.factor_series(F):
            s = s.normalized(tol)
            term = s.derivative() / s * e
            out = term if out is None else out + term
        return out if out is not None else Laurent([0] * F.prec, 0)


def _miller_step(E, R, P):
    """Factors g with div g = [R] + [P] - [R+P] - [O]."""
    if R.is_origin or P.is_origin:
        return []
    ch = E.chord(R, P)
    if ch is None:
        return [("vert", R.x, None, 1)]
    S = E.add(R, P)
    return [("line", ch[0], ch[1], 1), ("vert", S.x, None, -1)]


def divisor_function(E: EllCurveQ, D: PointDivisor, order: Sequence[int] | None = None) -> DivisorFunction:
    """phi_D by chord accumulation over the points of D (in ``order`` if given)."""
    if D.E is not E:
        D = PointDivisor(E, D.terms)
    terms = D.terms if order is None else [D.terms[i] for i in order]
    factors: list = []
    R = O
    for P, m in terms:
        if P.is_origin:
            continue
        step = P if m > 0 else E.neg(P)
        for _ in range(abs(m)):
            factors += _miller_step(E, R, step)
            if m < 0:
                factors.append(("vert", P.x, None, -1))
            R = E.add(R, step)
    if not R.is_origin:
        raise ValueError("divisor is not principal")
    # merge equal factors
    merged: list = []
    for f in factors:
        for i, g in enumerate(merged):
            if g[0] == f[0] and E._eq(g[1], f[1]) and (g[2] is None or E._eq(g[2], f[2])):
                merged[i] = (g[0], g[1], g[2], g[3] + f[3])
                break
        else:
            merged.append(f)
    return DivisorFunction(E, D, [f for f in merged if f[3]])


def katz_coefficients(E: EllCurveQ, D: PointDivisor, kmax: int, order=None,
                      F: FormalExpansion | None = None):
    """(f_1..f_kmax, g_1..g_kmax) from phi_D = C z^n (1 + f1 z + ...) and
    dphi/phi = (n/z + g1 + g2 z + ...) dz."""
    if kmax < 1:
        raise ValueError("kmax must be at least 1")
    phi = divisor_function(E, D, order)
    F = F or formal_weierstrass_expansion(E, kmax + 6)
    if F.prec < kmax + 4:
        raise ValueError("formal expansion precision too low")
    tol = 0.0 if E.exact else 1e-12
    ser = phi.laurent(F).normalized(tol)
    if len(ser.c) < kmax + 1:
        raise ValueError("formal expansion precision too low")
    lead = ser.c[0]
    f = [v / lead for v in ser.c[1 : kmax + 1]]
    ld = phi.log_derivative(F)
    n = ser.val
    g = [ld[k - 1] for k in range(1, kmax + 1)]
    # cross-check against phi'/phi computed from the product directly
    alt = ser.derivative() / ser
    for k in range(0, kmax + 1):
        a, b = ld[k - 1], alt[k - 1]
        if E.exact and a != b:
            raise ArithmeticError("log-derivative mismatch")
        if not E.exact and abs(a - b) > 1e-6 * (1 + abs(a)):
            raise ArithmeticError("log-derivative mismatch")
    if E.exact and ld[-1] != n:
        raise ArithmeticError("residue of dphi/phi differs from the order at O")
    return f, g


def slope_identities(E: EllCurveQ, P: CurvePoint, Q: CurvePoint) -> dict:
    """lambda through P, Q; gamma = -(P+Q); checks lambda^2 = x_P + x_Q + x_gamma."""
    if P.is_origin or Q.is_origin:
        raise ValueError("points must be affine")
    if E._eq(P.x, Q.x):
        raise ValueError("degenerate configuration: x_P = x_Q")
    lam = (Q.y - P.y) / (Q.x - P.x)
    S = E.add(P, Q)
    if S.is_origin:
        raise ValueError("P + Q = O")
    R = E.neg(S)
    lhs = lam * lam
    rhs = P.x + Q.x + R.x
    ok = (lhs == rhs) if E.exact else abs(lhs - rhs) <= 1e-8 * (1 + abs(lhs))
    return {"lambda": lam, "lambda_sq": lhs, "x_sum": rhs, "gamma": R, "holds": ok}


def numeric_period_bridge(tau: complex, N: int, cutoff: int = 160):
    """Float model of C/(Z + Z tau) with dz = dx/2y and its N-torsion table.

    Returns ``(E, table)`` where ``table[(i, j)]`` is the point
    (p(alpha), p'(alpha)/2) for alpha = i/N + j tau/N, and ``table[(0, 0)] = O``.
    """
    from .eisenstein import weierstrass_invariants, weierstrass_p, weierstrass_p_prime

    tau = complex(tau)
    if tau.imag <= 0:
        raise ValueError("tau must lie in the upper half plane")
    G4, G6 = weierstrass_invariants(tau, cutoff)
    E = EllCurveQ(complex(-15 * G4), complex(-35 * G6), tol=1e-7)
    table = {(0, 0): O}
    for i in range(N):
        for j in range(N):
            if i == 0 and j == 0:
                continue
            z = i / N + j * tau / N
            table[(i, j)] = CurvePoint(
                complex(weierstrass_p(z, tau, cutoff)), complex(weierstrass_p_prime(z, tau, cutoff)) / 2
            )
    return E, table
