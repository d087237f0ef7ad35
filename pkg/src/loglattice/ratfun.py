"""Exact rational-function arithmetic on P^1 over Q.

Polynomials are coefficient tuples (low degree first).  Only what the local
analysis of connection forms needs: products, division, Taylor shifts, and
truncated Laurent expansions at finite rational points and at infinity.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .core import CoreError, rat
from .geometry import INF, Point, as_point

Poly = tuple[Fraction, ...]


def poly(coeffs: Sequence) -> Poly:
    out = [rat(c) for c in coeffs]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def poly_is_zero(p: Poly) -> bool:
    return not p


def poly_deg(p: Poly) -> int:
    return len(p) - 1  # deg(0) = -1


def poly_add(a: Poly, b: Poly) -> Poly:
    n = max(len(a), len(b))
    return poly([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)
                 for i in range(n)])


def poly_scale(a: Poly, c) -> Poly:
    c = rat(c)
    return poly([c * x for x in a])


def poly_mul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return ()
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return poly(out)


def poly_divmod(a: Poly, b: Poly) -> tuple[Poly, Poly]:
    if not b:
        raise CoreError("polynomial division by zero")
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    r = list(a)
    while len(r) >= len(b):
        c = r[-1] / b[-1]
        k = len(r) - len(b)
        q[k] = c
        for i, y in enumerate(b):
            r[k + i] -= c * y
        while r and r[-1] == 0:
            r.pop()
    return poly(q), poly(r)


def poly_derivative(a: Poly) -> Poly:
    return poly([a[i] * i for i in range(1, len(a))])


def poly_eval(a: Poly, x) -> Fraction:
    x = rat(x)
    acc = Fraction(0)
    for c in reversed(a):
        acc = acc * x + c
    return acc


def poly_shift(a: Poly, p) -> Poly:
    """a(t + p) as a polynomial in t (exact Taylor shift)."""
    p = rat(p)
    out: Poly = ()
    for c in reversed(a):
        out = poly_add(poly_mul(out, poly([p, 1])), poly([c]))
    return out


def series_inverse(a: Poly, order: int) -> Poly:
    """1/a(t) modulo t^order; a(0) must be nonzero."""
    if not a or a[0] == 0:
        raise CoreError("series inverse needs a unit constant term")
    inv = [Fraction(1) / a[0]]
    for n in range(1, order):
        s = Fraction(0)
        for k in range(1, min(n, len(a) - 1) + 1):
            s += a[k] * inv[n - k]
        inv.append(-s / a[0])
    return tuple(inv)


class RationalFunction:
    """num/den in Q(x), poles tracked exactly."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=(1,)):
        self.num = poly(num)
        self.den = poly(den)
        if poly_is_zero(self.den):
            raise CoreError("zero denominator")

    def order_at(self, p: Point) -> int:
        """Vanishing order at p (negative = pole); at infinity this is
        deg den − deg num."""
        if poly_is_zero(self.num):
            raise CoreError("order of the zero function")
        if p == INF:
            return poly_deg(self.den) - poly_deg(self.num)
        return _vanishing(self.num, p) - _vanishing(self.den, p)

    def laurent_at(self, p: Point, lo: int, hi: int) -> dict[int, Fraction]:
        """Coefficients c_k of t^k for lo <= k <= hi, t the local coordinate
        at p (t = x − p, or t = 1/x at infinity)."""
        if poly_is_zero(self.num):
            return {}
        if p == INF:
            # f(1/t) = t^(deg den − deg num) rev(num)/rev(den)
            num = poly(tuple(reversed(self.num)))
            den = poly(tuple(reversed(self.den)))
            shift = poly_deg(self.den) - poly_deg(self.num)
            return _laurent_of_quotient(num, den, shift, lo, hi)
        num = poly_shift(self.num, p)
        den = poly_shift(self.den, p)
        return _laurent_of_quotient(num, den, 0, lo, hi)


def _vanishing(a: Poly, p) -> int:
    v, _ = _strip(poly_shift(a, p))
    return v


def _strip(a: Poly) -> tuple[int, Poly]:
    v = 0
    while v < len(a) and a[v] == 0:
        v += 1
    return v, poly(a[v:])


def _laurent_of_quotient(num: Poly, den: Poly, shift: int,
                         lo: int, hi: int) -> dict[int, Fraction]:
    """Laurent coefficients of t^shift num(t)/den(t) over [lo, hi]."""
    v_num, num = _strip(num)
    v_den, den = _strip(den)
    if poly_is_zero(num):
        return {}
    val = shift + v_num - v_den
    order = hi - val + 1
    if order <= 0:
        return {}
    inv = series_inverse(den, order)
    ser = poly_mul(num[:order], inv)[:order]
    out = {}
    for i, c in enumerate(ser):
        k = val + i
        if lo <= k <= hi and c:
            out[k] = c
    return out


class RationalForm:
    """Rational 1-form f(x) dx on P^1."""

    __slots__ = ("fn",)

    def __init__(self, num, den=(1,)):
        self.fn = RationalFunction(num, den)

    @classmethod
    def zero(cls) -> "RationalForm":
        return cls((0,))

    def is_zero(self) -> bool:
        return poly_is_zero(self.fn.num)

    def pole_order_at(self, p: Point) -> int:
        """Pole order of the form at p (0 when regular there)."""
        if self.is_zero():
            return 0
        if p == INF:
            # dx = −dt/t^2 at infinity
            return max(-(self.fn.order_at(INF) - 2), 0)
        return max(-self.fn.order_at(p), 0)

    def laurent_dt_at(self, p: Point, lo: int, hi: int) -> dict[int, Fraction]:
        """Coefficients of t^k dt in the local expansion at p."""
        if self.is_zero():
            return {}
        if p == INF:
            raw = self.fn.laurent_at(INF, lo + 2, hi + 2)
            return {k - 2: -c for k, c in raw.items()}
        return self.fn.laurent_at(p, lo, hi)

    def poles_within(self, points: Sequence[Point]) -> bool:
        """True when every pole of the form lies among the given points."""
        if self.is_zero():
            return True
        den = self.fn.den
        for p in points:
            if p == INF:
                continue
            while True:
                shifted = poly_shift(den, p)
                if shifted and shifted[0] == 0:
                    den = poly_divmod(den, poly([-rat(p), 1]))[0]
                else:
                    break
        return poly_deg(den) <= 0
