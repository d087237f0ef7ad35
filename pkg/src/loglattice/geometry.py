"""Divisors, line bundles and K_0 bookkeeping on the projective line.

Every sheaf in scope splits into line bundles and skyscrapers, so K_0 is
Z^2 via (rank, degree) and all cohomology reduces to the degree formula for
O(k).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence, Union

from .core import CoreError, rat

#: marker for the point at infinity on P^1
INF = "inf"

Point = Union[Fraction, str]


def as_point(p) -> Point:
    if p == INF or p == "oo" or p == "infinity":
        return INF
    return rat(p)


def point_key(p: Point) -> str:
    return INF if p == INF else str(p)


@dataclass(frozen=True)
class BoundaryDivisor:
    """Strict normal crossings boundary.

    Curve mode: a list of distinct marked points of P^1.
    Formal mode: the divisor {x_1 ... x_ell = 0} on an n-dimensional polydisc,
    so only the counts matter.
    """

    points: tuple[Point, ...] = ()
    n_vars: int = 1
    n_branches: int = 0

    @classmethod
    def curve(cls, points: Sequence) -> "BoundaryDivisor":
        pts = tuple(as_point(p) for p in points)
        if len(set(point_key(p) for p in pts)) != len(pts):
            raise CoreError("boundary points must be distinct")
        return cls(points=pts, n_vars=1, n_branches=len(pts))

    @classmethod
    def formal(cls, n_vars: int, n_branches: int) -> "BoundaryDivisor":
        if not (0 <= n_branches <= n_vars):
            raise CoreError("need 0 <= branches <= variables")
        return cls(points=(), n_vars=n_vars, n_branches=n_branches)

    @property
    def is_curve(self) -> bool:
        return bool(self.points)


@dataclass(frozen=True)
class TwistDivisor:
    """Effective divisor supported on the boundary (the Delta twist)."""

    multiplicities: tuple[int, ...]

    def __post_init__(self):
        if any(m < 0 for m in self.multiplicities):
            raise CoreError("twist divisor must be effective")

    @classmethod
    def zero(cls, n_components: int) -> "TwistDivisor":
        return cls((0,) * n_components)

    @classmethod
    def multiple(cls, n_components: int, m: int) -> "TwistDivisor":
        return cls((m,) * n_components)

    def __getitem__(self, i: int) -> int:
        return self.multiplicities[i]

    def __len__(self) -> int:
        return len(self.multiplicities)


class LineBundleP1:
    """Line bundle on P^1 presented by per-point pole orders against a fixed
    rational trivialization; the degree is their sum."""

    __slots__ = ("shifts", "degree")

    def __init__(self, shifts: Mapping[str, int] | None = None, degree: int | None = None):
        self.shifts = dict(shifts or {})
        total = sum(self.shifts.values())
        if degree is not None and self.shifts and degree != total:
            raise CoreError("degree must equal the sum of local shifts")
        self.degree = total if degree is None else degree

    def twist(self, other: "LineBundleP1") -> "LineBundleP1":
        shifts = dict(self.shifts)
        for p, s in other.shifts.items():
            shifts[p] = shifts.get(p, 0) + s
        return LineBundleP1(shifts, self.degree + other.degree)

    def dual(self) -> "LineBundleP1":
        return LineBundleP1({p: -s for p, s in self.shifts.items()}, -self.degree)

    def shift_at(self, p) -> int:
        return self.shifts.get(point_key(as_point(p)), 0)

    def __eq__(self, other):
        return (isinstance(other, LineBundleP1) and self.degree == other.degree
                and self.shifts == other.shifts)

    def __repr__(self):
        return f"O({self.degree})" + (f"{self.shifts}" if self.shifts else "")


@dataclass(frozen=True)
class K0Class:
    rank: int
    degree: int

    def __add__(self, other: "K0Class") -> "K0Class":
        return K0Class(self.rank + other.rank, self.degree + other.degree)

    def __neg__(self) -> "K0Class":
        return K0Class(-self.rank, -self.degree)

    def __sub__(self, other: "K0Class") -> "K0Class":
        return self + (-other)


def k0_class(sheaf) -> K0Class:
    """Class of a formal sum of line bundles and skyscrapers.

    Accepts a LineBundleP1, an int (skyscraper length), or an iterable of
    such terms; a skyscraper of length l contributes (0, l).
    """
    if isinstance(sheaf, LineBundleP1):
        return K0Class(1, sheaf.degree)
    if isinstance(sheaf, int):
        if sheaf < 0:
            raise CoreError("skyscraper length must be non-negative")
        return K0Class(0, sheaf)
    total = K0Class(0, 0)
    for term in sheaf:
        total = total + k0_class(term)
    return total


def line_bundle_cohomology(k: int) -> tuple[int, int]:
    """(h0, h1) of O(k) on P^1."""
    return max(k + 1, 0), max(-k - 1, 0)


def log_forms(D: BoundaryDivisor) -> LineBundleP1:
    """Omega^1(log D) on P^1: degree −2 + #points, log pole at each point."""
    if not D.is_curve:
        raise CoreError("log_forms needs a curve-mode divisor")
    shifts = {point_key(p): 1 for p in D.points}
    base = point_key(D.points[0])
    shifts[base] -= 2
    return LineBundleP1(shifts)


def canonical_bundle(D: BoundaryDivisor | None = None) -> LineBundleP1:
    """omega_{P^1} = O(−2), charged at a boundary point when one is given."""
    if D is not None and D.is_curve:
        return LineBundleP1({point_key(D.points[0]): -2})
    return LineBundleP1({}, degree=-2)
