"""Gaussian elimination over exact fields (Fraction or CycElt entries)."""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence


def _inv(x):
    return x.inverse() if hasattr(x, "inverse") else 1 / Fraction(x)


def _eliminate(m: list[list], ncols: int) -> list[int]:
    """In-place Gauss-Jordan on the first ``ncols`` columns; returns pivot columns."""
    pivots = []
    r = 0
    for c in range(ncols):
        if r == len(m):
            break
        piv = next((i for i in range(r, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = _inv(m[r][c])
        m[r] = [x * inv if x else x for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y if y else x for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return pivots


def rref(rows: Sequence[Sequence], ncols: int | None = None):
    """Reduced row echelon form.

    Returns ``(matrix, pivots)`` where ``matrix`` holds the nonzero rows only,
    each with a leading 1 in column ``pivots[i]``.
    """
    m = [list(r) for r in rows]
    if not m:
        return [], []
    pivots = _eliminate(m, len(m[0]) if ncols is None else ncols)
    return m[: len(pivots)], pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1])


def left_kernel(rows: Sequence[Sequence], zero, one) -> list[list]:
    """Basis, in reduced echelon form, of {v : sum_i v_i * rows[i] = 0}."""
    n = len(rows)
    if n == 0:
        return []
    width = len(rows[0])
    m = [list(r) + [one if i == j else zero for j in range(n)] for i, r in enumerate(rows)]
    pivots = _eliminate(m, width)
    kernel = [row[width:] for row in m[len(pivots):]]
    return rref(kernel)[0] if kernel else []


def primitive_integer(vec: Sequence) -> list[int]:
    """Scale a rational vector to a primitive integer vector with first nonzero entry positive."""
    fr = [Fraction(x) for x in vec]
    den = 1
    for x in fr:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in fr]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        return ints
    ints = [x // g for x in ints]
    if next(x for x in ints if x) < 0:
        ints = [-x for x in ints]
    return ints
