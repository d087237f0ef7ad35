"""Lattice towers: the span recursion, its closed form, window-restricted
saturation, irregularity, and regular-singularity detection.

Levels are stored intensionally as one effective shift vector per block; the
recursion step computes on window generators only to certify the intensional
update against the actual span.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .connection import ElementaryModel, FormalConnection
from .core import CoreError, SparseMatrixQ, WeightWindow, rank_q
from .geometry import TwistDivisor

Shift = tuple[int, ...]


class WindowOverflow(CoreError):
    """A shift left the window; enlarge the window to go deeper."""


class NonStabilizing(CoreError):
    pass


@dataclass(frozen=True)
class LatticeTower:
    """Nested lattices E_0 ⊆ ... ⊆ E_depth as per-block shift vectors."""

    conn: FormalConnection
    levels: tuple[tuple[Shift, ...], ...]
    delta: TwistDivisor

    def __post_init__(self):
        for lv, nxt in zip(self.levels, self.levels[1:]):
            for a, b in zip(lv, nxt):
                if any(x > y for x, y in zip(a, b)):
                    raise CoreError("tower levels must be nested")

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def shift(self, level: int, blk: int) -> Shift:
        """Shift vector of the given block at the given level; levels beyond
        the stored depth keep growing by the closed-form rate, levels below
        zero are the zero lattice (None)."""
        if level < 0:
            return None
        if level <= self.depth:
            return self.levels[level][blk]
        extra = level - self.depth
        pole = self.conn.blocks[blk].phi.pole_divisor()
        top = self.levels[self.depth][blk]
        return tuple(s + extra * m for s, m in zip(top, pole))

    def twisted_shift(self, level: int, blk: int,
                      extra: TwistDivisor | None = None) -> Shift:
        s = self.shift(level, blk)
        if s is None:
            return None
        out = tuple(x + d for x, d in zip(s, self.delta.multiplicities))
        if extra is not None:
            out = tuple(x + d for x, d in zip(out, extra.multiplicities))
        return out

    def level_equal(self, i: int, j: int) -> bool:
        return self.levels[i] == self.levels[j]


@dataclass(frozen=True)
class V0Module:
    """Window-restricted union of the tower with its stabilization index."""

    tower: LatticeTower
    window: WeightWindow
    stabilization_index: int

    def stable_shift(self, blk: int) -> Shift:
        return self.tower.shift(self.stabilization_index, blk)


def seed_level(conn: FormalConnection) -> tuple[Shift, ...]:
    from .connection import dm_lattice

    return tuple(dm_lattice(conn))


def _lattice_monomials(window: WeightWindow, n_branches: int, shift: Shift):
    """Exponents in the window with gamma_i >= -shift_i on the branches."""
    lo = list(window.lo)
    for i in range(n_branches):
        lo[i] = max(lo[i], -shift[i])
    if any(a > b for a, b in zip(lo, window.hi)):
        return []
    return list(WeightWindow(tuple(lo), window.hi).points())


def lattice_dimension(window: WeightWindow, conn: FormalConnection,
                      shifts: Sequence[Shift]) -> int:
    return sum(len(_lattice_monomials(window, conn.n_branches, s)) * b.rank
               for s, b in zip(shifts, conn.blocks))


def _span_certifies(block: ElementaryModel, old: Shift, new: Shift,
                    window: WeightWindow) -> bool:
    """Check on the window that E_old + Theta(log D)·E_old spans exactly the
    monomial lattice with shift ``new``.

    Containment of the span in the claimed lattice is exact; the reverse
    containment is certified away from the top of the window, where the
    generators producing corner monomials would fall outside it.
    """
    n = block.phi.n_vars
    ell = block.phi.n_branches
    rank = block.rank
    if any(-s < l for s, l in zip(new, window.lo)):
        raise WindowOverflow(f"shift {new} exceeds window {window.lo}")
    claimed = _lattice_monomials(window, ell, new)
    index = {(g, a): k for k, (g, a) in
             enumerate((g, a) for g in claimed for a in range(rank))}
    theta = [block.phi.theta_phi(i) for i in range(n)]
    cols: list[dict[int, Fraction]] = []
    gens = _lattice_monomials(window, ell, old)
    for g in gens:
        for a in range(rank):
            cols.append({index[(g, a)]: Fraction(1)})
            for i in range(n):
                col: dict[int, Fraction] = {}
                if i < ell:
                    if g[i]:
                        col[index[(g, a)]] = Fraction(g[i])
                    mat = block.regular.branch_matrix(i)
                    for r in range(rank):
                        if mat[r][a]:
                            key = index[(g, r)]
                            col[key] = col.get(key, Fraction(0)) + mat[r][a]
                elif g[i]:
                    tgt = tuple(x - (1 if k == i else 0) for k, x in enumerate(g))
                    if window.contains(tgt):
                        col[index[(tgt, a)]] = Fraction(g[i])
                for e, c in theta[i].items():
                    tgt = tuple(x + y for x, y in zip(g, e))
                    if not window.contains(tgt):
                        continue
                    key = index.get((tgt, a))
                    if key is None:
                        return False  # span leaves the claimed lattice
                    col[key] = col.get(key, Fraction(0)) + c
                if col:
                    cols.append(col)
    m = SparseMatrixQ(len(index), len(cols),
                      {(r, j): v for j, col in enumerate(cols) for r, v in col.items()})
    pole = block.phi.pole_divisor()
    trimmed = [index[(g, a)] for g in claimed for a in range(rank)
               if all(g[i] + pole[i] <= window.hi[i] for i in range(ell))]
    units = SparseMatrixQ(len(index), len(trimmed),
                          {(r, j): Fraction(1) for j, r in enumerate(trimmed)})
    r0 = rank_q(m)
    return rank_q(m.hstack(units)) == r0


def step(shifts: Sequence[Shift], conn: FormalConnection,
         window: WeightWindow | None = None, verify: bool = True) -> tuple[Shift, ...]:
    """Smallest lattice containing the level and all its log derivatives.

    Fast path: each block grows by its pole divisor.  With a window the
    intensional update is certified against the generated span.
    """
    out = []
    for s, blk in zip(shifts, conn.blocks):
        pole = blk.phi.pole_divisor()
        new = tuple(x + m for x, m in zip(s, pole))
        if verify:
            if window is None:
                raise CoreError("verification requires a window")
            if not _span_certifies(blk, tuple(s), new, window):
                raise CoreError(f"span certificate failed for shift {s} -> {new}")
        out.append(new)
    return tuple(out)


def tower(conn: FormalConnection, depth: int, window: WeightWindow | None = None,
          delta: TwistDivisor | None = None, verify: bool = True) -> LatticeTower:
    """Iterate the recursion from the canonical seed."""
    if depth < 0:
        raise CoreError("depth must be >= 0")
    levels = [seed_level(conn)]
    for _ in range(depth):
        levels.append(step(levels[-1], conn, window, verify))
    return LatticeTower(conn, tuple(levels),
                        delta or TwistDivisor.zero(conn.n_branches))


def closed_form_tower(conn: FormalConnection, depth: int,
                      delta: TwistDivisor | None = None) -> LatticeTower:
    """Level i is the seed twisted by i times the pole divisor, blockwise."""
    conn.validate_goodness()
    poles = [b.phi.pole_divisor() for b in conn.blocks]
    levels = tuple(tuple(tuple(i * m for m in pole) for pole in poles)
                   for i in range(depth + 1))
    return LatticeTower(conn, levels, delta or TwistDivisor.zero(conn.n_branches))


def irregularity(conn: FormalConnection) -> int:
    """Length of E_1/E_0 at a disc point: sum of rank times pole order."""
    if conn.n_vars != 1:
        raise CoreError("irregularity is a curve-point invariant")
    total = 0
    for b in conn.blocks:
        total += b.rank * b.phi.pole_divisor()[0]
    return total


def is_regular_singular(conn: FormalConnection,
                        window: WeightWindow | None = None) -> bool:
    """True iff one recursion step does not move the seed."""
    if window is None:
        bound = 1 + max((max(b.phi.pole_divisor(), default=0)
                         for b in conn.blocks), default=0)
        bound = max(bound, 3)
        window = WeightWindow((-bound,) * conn.n_vars, (bound,) * conn.n_vars)
    s0 = seed_level(conn)
    return step(s0, conn, window, verify=True) == s0


def v0_on_window(conn: FormalConnection, window: WeightWindow,
                 delta: TwistDivisor | None = None) -> V0Module:
    """Iterate the recursion until the window-restricted lattice stops
    growing; the clip of every later level agrees with the recorded one."""
    delta = delta or TwistDivisor.zero(conn.n_branches)
    poles = [b.phi.pole_divisor() for b in conn.blocks]
    min_pole = min((min(x for x in p if x) for p in poles if any(p)), default=None)
    depth_cap = 1 if min_pole is None else 1 + max(
        -l for l in window.lo) // min_pole + 1

    def clip(shifts):
        return tuple(tuple(min(s, -l) for s, l in zip(sh, window.lo))
                     for sh in shifts)

    levels = [seed_level(conn)]
    idx = None
    for i in range(depth_cap + 1):
        nxt = step(levels[-1], conn, window, verify=False)
        if clip(nxt) == clip(levels[-1]):
            idx = i
            break
        levels.append(nxt)
    if idx is None:
        raise NonStabilizing(
            f"no stabilization within {depth_cap} steps on window {window.lo}")
    tw = LatticeTower(conn, tuple(levels), delta)
    return V0Module(tw, window, idx)
