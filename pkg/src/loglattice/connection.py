"""Data model for unramified formal connections and rank-one connections on
the projective line.

A formal connection is a direct sum of elementary blocks (phi, R): a rank-one
exponential factor phi (the purely irregular twist) tensored with a regular
part whose residues are normalized into [0, 1) and whose nilpotent parts
commute.  Ramified local types enter only as user-declared pullback data
under a cyclic Kummer cover, with invariants taken explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from .core import CoreError, Exponent, TruncatedLaurentSeries, WeightWindow, rat
from .geometry import INF, BoundaryDivisor, Point, as_point
from .ratfun import RationalForm

Matrix = tuple[tuple[Fraction, ...], ...]


class BadBlock(CoreError):
    pass


class RamifiedLocalType(CoreError):
    """Local slope data is non-integral: the type only exists after a cover."""


def _matrix(rows, rank) -> Matrix:
    m = tuple(tuple(rat(c) for c in r) for r in rows)
    if len(m) != rank or any(len(r) != rank for r in m):
        raise BadBlock(f"expected a {rank}x{rank} matrix")
    return m


def _mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n = len(a)
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n))
                 for i in range(n))


def _mat_is_zero(a: Matrix) -> bool:
    return all(all(c == 0 for c in r) for r in a)


def zero_matrix(rank: int) -> Matrix:
    return tuple((Fraction(0),) * rank for _ in range(rank))


@dataclass(frozen=True)
class ExponentialFactor:
    """phi = u(x) * sum_alpha c_alpha x^(−alpha), poles along the boundary.

    ``terms`` maps alpha in N^ell \\ {0} to c_alpha; the optional unit u is a
    polynomial in all n variables with u(0) != 0.
    """

    n_vars: int
    n_branches: int
    terms: tuple[tuple[Exponent, Fraction], ...]
    unit: tuple[tuple[Exponent, Fraction], ...] | None = None

    @classmethod
    def make(cls, n_vars: int, n_branches: int, terms: Mapping,
             unit: Mapping | None = None) -> "ExponentialFactor":
        tt = []
        for a, c in terms.items():
            a = tuple(int(x) for x in a)
            c = rat(c)
            if len(a) != n_branches:
                raise BadBlock(f"pole exponent {a} must have one entry per branch")
            if any(x < 0 for x in a) or all(x == 0 for x in a):
                raise BadBlock(f"pole exponent {a} must be in N^l minus 0")
            if c:
                tt.append((a, c))
        uu = None
        if unit:
            uu = []
            for b, c in unit.items():
                b = tuple(int(x) for x in b)
                if len(b) != n_vars or any(x < 0 for x in b):
                    raise BadBlock(f"unit exponent {b} must be in N^n")
                c = rat(c)
                if c:
                    uu.append((tuple(b), c))
            uu.sort()
            const = dict(uu).get((0,) * n_vars, Fraction(0))
            if const == 0:
                raise BadBlock("unit must satisfy u(0) != 0")
            uu = tuple(uu)
        tt.sort()
        return cls(n_vars, n_branches, tuple(tt), uu)

    @classmethod
    def zero(cls, n_vars: int, n_branches: int) -> "ExponentialFactor":
        return cls(n_vars, n_branches, ())

    def is_zero(self) -> bool:
        return not self.terms

    def pole_divisor(self) -> tuple[int, ...]:
        """I_phi: componentwise maximum of the pole exponents."""
        if not self.terms:
            return (0,) * self.n_branches
        return tuple(max(a[i] for a, _ in self.terms) for i in range(self.n_branches))

    def is_good(self) -> bool:
        """A single dominant monomial: phi = u x^(−m) with u a unit."""
        if not self.terms:
            return True
        m = self.pole_divisor()
        return dict(self.terms).get(m, Fraction(0)) != 0

    def difference(self, other: "ExponentialFactor") -> "ExponentialFactor":
        if (self.n_vars, self.n_branches) != (other.n_vars, other.n_branches):
            raise BadBlock("cannot subtract factors of different arity")
        if self.unit or other.unit:
            raise BadBlock("difference of factors with units is out of scope")
        acc = dict(self.terms)
        for a, c in other.terms:
            s = acc.get(a, Fraction(0)) - c
            if s:
                acc[a] = s
            else:
                acc.pop(a, None)
        return ExponentialFactor(self.n_vars, self.n_branches, tuple(sorted(acc.items())))

    def _as_coeff_dict(self) -> dict[Exponent, Fraction]:
        # pole exponents embedded into Z^n as negatives on the branch slots
        pad = self.n_vars - self.n_branches
        base = {(tuple(-x for x in a) + (0,) * pad): c for a, c in self.terms}
        if self.unit is None:
            return base
        out: dict[Exponent, Fraction] = {}
        for b, cu in self.unit:
            for e, c in base.items():
                key = tuple(x + y for x, y in zip(e, b))
                s = out.get(key, Fraction(0)) + cu * c
                if s:
                    out[key] = s
                else:
                    del out[key]
        return out

    def theta_phi(self, i: int) -> dict[Exponent, Fraction]:
        """Exact coefficients of theta_i(phi), theta_i the i-th log frame
        derivation (x_i d/dx_i on branches, d/dx_i beyond)."""
        if not (0 <= i < self.n_vars):
            raise CoreError(f"variable index {i} out of range")
        out: dict[Exponent, Fraction] = {}
        for e, c in self._as_coeff_dict().items():
            if e[i] == 0:
                continue
            if i < self.n_branches:
                key, val = e, c * e[i]
            else:
                key = tuple(x - (1 if k == i else 0) for k, x in enumerate(e))
                val = c * e[i]
            s = out.get(key, Fraction(0)) + val
            if s:
                out[key] = s
            else:
                del out[key]
        return out


@dataclass(frozen=True)
class RegularBlock:
    """Regular part: per-branch residue in [0,1) plus commuting nilpotents."""

    rank: int
    residues: tuple[Fraction, ...]
    nilpotents: tuple[Matrix, ...]

    @classmethod
    def make(cls, rank: int, residues: Sequence, nilpotents: Sequence | None = None,
             normalized: bool = True) -> "RegularBlock":
        res = tuple(rat(r) for r in residues)
        if normalized and any(not (0 <= r < 1) for r in res):
            raise BadBlock(f"residues {res} not normalized into [0,1)")
        if nilpotents is None:
            nil = tuple(zero_matrix(rank) for _ in res)
        else:
            nil = tuple(_matrix(n, rank) for n in nilpotents)
            if len(nil) != len(res):
                raise BadBlock("one nilpotent matrix per branch required")
        for n in nil:
            p = n
            for _ in range(rank):
                p = _mat_mul(p, n)
            if not _mat_is_zero(p):
                raise BadBlock("matrix is not nilpotent")
        for a, b in combinations(nil, 2):
            if _mat_mul(a, b) != _mat_mul(b, a):
                raise BadBlock("nilpotent parts must commute")
        return cls(rank, res, nil)

    @classmethod
    def rank_one(cls, residues: Sequence, normalized: bool = True) -> "RegularBlock":
        return cls.make(1, residues, None, normalized)

    def branch_matrix(self, i: int) -> Matrix:
        """Action of the i-th log derivation on the lattice frame:
        residue_i * Id + N_i."""
        lam = self.residues[i]
        n = self.nilpotents[i]
        return tuple(tuple(n[r][c] + (lam if r == c else 0) for c in range(self.rank))
                     for r in range(self.rank))


@dataclass(frozen=True)
class ElementaryModel:
    """One unramified block (phi, R)."""

    phi: ExponentialFactor
    regular: RegularBlock

    def __post_init__(self):
        if self.phi.n_branches != len(self.regular.residues):
            raise BadBlock("phi and regular part disagree on branch count")

    @property
    def rank(self) -> int:
        return self.regular.rank

    def is_good(self) -> bool:
        return self.phi.is_good()


@dataclass(frozen=True)
class FormalConnection:
    """Direct sum of elementary blocks on a formal polydisc."""

    n_vars: int
    n_branches: int
    blocks: tuple[ElementaryModel, ...]

    @classmethod
    def make(cls, n_vars: int, n_branches: int, blocks: Sequence[ElementaryModel]):
        for b in blocks:
            if b.phi.n_vars != n_vars or b.phi.n_branches != n_branches:
                raise BadBlock("block arity does not match the connection")
        return cls(n_vars, n_branches, tuple(blocks))

    @property
    def boundary(self) -> BoundaryDivisor:
        return BoundaryDivisor.formal(self.n_vars, self.n_branches)

    @property
    def rank(self) -> int:
        return sum(b.rank for b in self.blocks)

    def validate_goodness(self) -> None:
        """Each phi and each pairwise difference has a dominant monomial and
        the pole divisors are totally ordered."""
        divisors = []
        for b in self.blocks:
            if not b.is_good():
                raise BadBlock(f"block {b.phi.terms} has no dominant monomial")
            if not b.phi.is_zero():
                divisors.append(b.phi.pole_divisor())
        for x, y in combinations([b.phi for b in self.blocks], 2):
            if x.unit or y.unit:
                continue
            d = x.difference(y)
            if not d.is_good():
                raise BadBlock("difference of exponential factors is not good")
            if not d.is_zero():
                divisors.append(d.pole_divisor())
        for a, b in combinations(divisors, 2):
            if not (all(x <= y for x, y in zip(a, b)) or all(x >= y for x, y in zip(a, b))):
                raise BadBlock(f"pole divisors {a}, {b} are not comparable")


# ---------------------------------------------------------------------------
# curve connections on P^1


@dataclass(frozen=True)
class CurveBlock:
    """Rank-one summand given by its global connection form, or a declared
    pullback of such a form under t^rho = local coordinate at one point."""

    omega: RationalForm
    pullback_order: int = 1
    pullback_point: Point | None = None

    @property
    def rank(self) -> int:
        return self.pullback_order


@dataclass(frozen=True)
class CurveConnection:
    boundary: BoundaryDivisor
    blocks: tuple[CurveBlock, ...]

    @classmethod
    def rank_one(cls, points: Sequence, num, den=(1,)) -> "CurveConnection":
        D = BoundaryDivisor.curve(points)
        blk = CurveBlock(RationalForm(num, den))
        cc = cls(D, (blk,))
        cc.validate()
        return cc

    @classmethod
    def direct_sum(cls, *conns: "CurveConnection") -> "CurveConnection":
        D = conns[0].boundary
        for c in conns[1:]:
            if c.boundary != D:
                raise CoreError("direct sum needs a common boundary divisor")
        return cls(D, tuple(b for c in conns for b in c.blocks))

    @property
    def rank(self) -> int:
        return sum(b.rank for b in self.blocks)

    def validate(self) -> None:
        for b in self.blocks:
            if not b.omega.poles_within(list(self.boundary.points)):
                raise CoreError("connection form has a pole outside the boundary")


@dataclass(frozen=True)
class LocalType:
    """Formal type at a curve point: exponential factor, tau-normalized
    regular part, and the integral twist performed by the normalization."""

    phi: ExponentialFactor
    regular: RegularBlock
    twist: int

    @property
    def pole_order(self) -> int:
        return self.phi.pole_divisor()[0]

    def as_connection(self) -> FormalConnection:
        return FormalConnection.make(1, 1, [ElementaryModel(self.phi, self.regular)])


def tau_normalize(residue: Fraction) -> tuple[Fraction, int]:
    """Split a rational residue as lambda + floor with lambda in [0, 1).

    Returns (lambda, c) where the lattice generator is twisted by t^c.
    """
    residue = rat(residue)
    import math

    fl = math.floor(residue)
    return residue - fl, -fl


def local_formal_type(c: CurveConnection, p, block_index: int = 0) -> LocalType:
    """Partial-fraction expansion of omega at p: phi is the primitive of the
    order >= 2 polar part, the residue is normalized into [0,1) with the
    integral shift recorded as a lattice twist.

    Declared pullback blocks are rejected: their slope data is non-integral
    downstairs.
    """
    p = as_point(p)
    if all(str(q) != str(p) for q in c.boundary.points):
        raise CoreError(f"{p} is not a boundary point")
    blk = c.blocks[block_index]
    if blk.pullback_order != 1:
        if blk.pullback_point is not None and str(blk.pullback_point) == str(p):
            raise RamifiedLocalType(
                f"block {block_index} at {p}: slopes have denominator "
                f"{blk.pullback_order}, no unramified formal type exists")
        # away from the ramification point the upstairs form is the local form
    w = blk.omega
    order = w.pole_order_at(p)
    tail = w.laurent_dt_at(p, -max(order, 1), -1)
    phi_terms = {}
    for k, coeff in tail.items():
        if k <= -2:
            # primitive of c t^k dt is c t^(k+1)/(k+1)
            phi_terms[(-(k + 1),)] = coeff / (k + 1)
    residue = tail.get(-1, Fraction(0))
    lam, twist = tau_normalize(residue)
    phi = ExponentialFactor.make(1, 1, phi_terms)
    return LocalType(phi, RegularBlock.rank_one([lam]), twist)


def dm_lattice(f: FormalConnection):
    """Seed lattice of the tower: zero shift on every good block.

    Returns the per-block shift vectors of level zero; the tower machinery
    turns this into actual levels.  Raises on any non-good block.
    """
    f.validate_goodness()
    return [(0,) * f.n_branches for _ in f.blocks]


@dataclass(frozen=True)
class KummerCover:
    """Cyclic cover t_i^(rho_i) = x_i with mu_rho acting by declared weights.

    ``weights`` are the monomial weights of the action on the coordinates
    (t_i -> zeta^(w_i) t_i); ``basis_twist`` the weight on the frame vector.
    """

    rho: tuple[int, ...]
    weights: tuple[int, ...]
    basis_twist: int = 0

    def __post_init__(self):
        if any(r < 1 for r in self.rho):
            raise CoreError("cover exponents must be >= 1")

    @property
    def order(self) -> int:
        from math import lcm

        return lcm(*self.rho) if self.rho else 1


@dataclass(frozen=True)
class DownstairsLattice:
    shift: tuple[int, ...]
    residues: tuple[Fraction, ...]
    twists: tuple[int, ...]


def kummer_invariants(upstairs_shift: Sequence[int], upstairs_residues: Sequence,
                      cover: KummerCover, window: WeightWindow) -> DownstairsLattice:
    """Invariant sections of a monomial lattice under the cyclic action,
    expressed downstairs via x_i = t_i^(rho_i).

    The invariant monomials are enumerated on the window and must form a
    shifted product lattice (the downstairs monomial lattice); an action that
    does not produce one is rejected.  The identity cover is the identity.
    """
    ell = len(upstairs_shift)
    if len(cover.rho) != ell or len(cover.weights) != ell:
        raise CoreError("cover data does not match the branch count")
    order = cover.order
    shift = tuple(int(s) for s in upstairs_shift)

    def invariant(gamma):
        w = cover.basis_twist + sum(g * wi for g, wi in zip(gamma, cover.weights))
        return w % order == 0

    lo = tuple(max(window.lo[i] if i < window.n_vars else -shift[i], -shift[i])
               for i in range(ell))
    hi = tuple(window.hi[i] if i < window.n_vars else lo[i] + 2 * order
               for i in range(ell))
    box = WeightWindow(lo, hi)
    inv_set = {g for g in box.points() if invariant(g)}
    if not inv_set:
        raise CoreError("no invariant sections on the window")
    bottom = tuple(min(g[i] for g in inv_set) for i in range(ell))
    for gamma in box.points():
        expected = all((g - b) % r == 0 for g, b, r in zip(gamma, bottom, cover.rho))
        if (gamma in inv_set) != expected:
            raise CoreError(
                f"action not compatible with a monomial lattice (at {gamma})")

    down_shift, residues, twists = [], [], []
    for i in range(ell):
        ref = bottom[i] % cover.rho[i]       # frame exponent in [0, rho_i)
        down_shift.append((ref - bottom[i]) // cover.rho[i])
        lam = rat(upstairs_residues[i])
        norm, tw = tau_normalize((lam + ref) / cover.rho[i])
        residues.append(norm)
        twists.append(tw)
    return DownstairsLattice(tuple(down_shift), tuple(residues), tuple(twists))


def ramification_index(c: CurveConnection, p, bound: int = 6) -> int:
    """Minimal cover order rho <= bound making every block's local type at p
    unramified; tested over the divisors of the bound in increasing order."""
    p = as_point(p)
    divisors = sorted({d for d in range(1, bound + 1) if bound % d == 0})
    for rho in divisors:
        ok = True
        for bi, blk in enumerate(c.blocks):
            needed = blk.pullback_order if (
                blk.pullback_point is not None and str(blk.pullback_point) == str(p)) else 1
            if needed == 1:
                try:
                    local_formal_type(c, p, bi)
                except RamifiedLocalType:
                    ok = False
            elif rho % needed != 0:
                ok = False
        if ok:
            return rho
    raise CoreError(f"no unramifying cover order divides {bound}")
