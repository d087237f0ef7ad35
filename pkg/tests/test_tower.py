import random
from fractions import Fraction

import pytest

from loglattice.connection import (
    ElementaryModel,
    ExponentialFactor,
    FormalConnection,
    RegularBlock,
)
from loglattice.core import WeightWindow
from loglattice.geometry import TwistDivisor
from loglattice.tower import (
    NonStabilizing,
    WindowOverflow,
    closed_form_tower,
    irregularity,
    is_regular_singular,
    seed_level,
    step,
    tower,
    v0_on_window,
)

W = WeightWindow((-8,), (8,))
W2 = WeightWindow((-6, -6), (6, 6))


def conn1(terms, residues=None, rank=1, nilpotents=None, n_vars=1, n_branches=1):
    phi = ExponentialFactor.make(n_vars, n_branches, terms)
    reg = RegularBlock.make(rank, residues or [0] * n_branches, nilpotents)
    return FormalConnection.make(n_vars, n_branches, [ElementaryModel(phi, reg)])


def sum_conn(*conns):
    c0 = conns[0]
    return FormalConnection.make(c0.n_vars, c0.n_branches,
                                 [b for c in conns for b in c.blocks])


REGULAR = conn1({}, residues=[0])
KUMMER = conn1({}, residues=[Fraction(1, 2)])
EXP1 = conn1({(1,): 1})
EXP2 = conn1({(2,): 1})
BIDISC = conn1({(1, 1): 1}, n_vars=2, n_branches=2)


class TestStep:
    def test_regular_block_fixed(self):
        s0 = seed_level(REGULAR)
        assert step(s0, REGULAR, W) == s0

    def test_exp2_grows_by_two(self):
        assert step(((0,),), EXP2, W) == ((2,),)
        assert step(((2,),), EXP2, W) == ((4,),)

    def test_bidisc_grows_diagonally(self):
        assert step(((0, 0),), BIDISC, W2) == ((1, 1),)
        assert step(((2, 2),), BIDISC, W2) == ((3, 3),)

    def test_window_overflow(self):
        with pytest.raises(WindowOverflow):
            step(((8,),), EXP1, W)

    def test_rank_two_with_nilpotent(self):
        c = conn1({(1,): 1}, residues=[Fraction(1, 3)], rank=2,
                  nilpotents=[[[0, 1], [0, 0]]])
        assert step(((0,),), c, W) == ((1,),)


class TestTower:
    def test_regular_three_equal_levels(self):
        t = tower(REGULAR, 2, W)
        assert t.levels == (((0,),), ((0,),), ((0,),))

    def test_exp1_shifts(self):
        t = tower(EXP1, 2, W)
        assert t.levels == (((0,),), ((1,),), ((2,),))

    def test_mixed_sum_blockwise(self):
        c = sum_conn(EXP1, KUMMER)
        t = tower(c, 1, W)
        assert t.levels == (((0,), (0,)), ((1,), (0,)))

    def test_nesting_enforced(self):
        t = tower(EXP2, 3, W)
        for i in range(t.depth):
            assert all(a <= b for a, b in zip(t.levels[i][0], t.levels[i + 1][0]))

    def test_stability_persists(self):
        # equality at one step forces equality at all later ones
        t = tower(REGULAR, 4, W)
        assert t.level_equal(0, 1)
        assert all(t.level_equal(i, i + 1) for i in range(4))


class TestClosedForm:
    def test_pole_three_level_two(self):
        c = conn1({(3,): 1})
        t = closed_form_tower(c, 2)
        assert t.levels[2] == ((6,),)

    def test_regular_all_zero(self):
        t = closed_form_tower(REGULAR, 3)
        assert all(lv == ((0,),) for lv in t.levels)

    def test_bidisc_componentwise(self):
        c = conn1({(2, 1): 1}, n_vars=2, n_branches=2)
        t = closed_form_tower(c, 1)
        assert t.levels[1] == ((2, 1),)

    def test_matches_recursion_on_random_catalog(self):
        rng = random.Random(11)
        for _ in range(12):
            ell = rng.choice([1, 2])
            n_vars = ell
            if rng.random() < 0.3:
                terms = {}
            else:
                m = tuple(rng.randint(0, 3) for _ in range(ell))
                if all(x == 0 for x in m):
                    m = tuple(1 for _ in range(ell))
                terms = {m: Fraction(rng.randint(1, 3))}
                # occasionally add a dominated extra term
                if rng.random() < 0.4 and any(x > 1 for x in m):
                    sub = tuple(max(x - 1, 0) for x in m)
                    if any(sub):
                        terms[sub] = Fraction(1, 2)
            residues = [rng.choice([Fraction(0), Fraction(1, 3), Fraction(1, 2)])
                        for _ in range(ell)]
            c = conn1(terms, residues=residues, n_vars=n_vars, n_branches=ell)
            w = WeightWindow((-14,) * n_vars, (14,) * n_vars)
            depth = rng.randint(0, 4)
            if terms:
                depth = min(depth, 13 // max(max(terms)))
            assert tower(c, depth, w).levels == closed_form_tower(c, depth).levels

    def test_extension_beyond_depth(self):
        t = closed_form_tower(EXP2, 1)
        assert t.shift(4, 0) == (8,)
        assert t.shift(-1, 0) is None


class TestIrregularity:
    def test_single_pole(self):
        for m in (1, 2, 3):
            assert irregularity(conn1({(m,): 1})) == m

    def test_regular_is_zero(self):
        assert irregularity(REGULAR) == 0
        assert irregularity(KUMMER) == 0

    def test_additive(self):
        c = sum_conn(EXP1, conn1({(3,): 1}))
        assert irregularity(c) == 4

    def test_rank_multiplies(self):
        c = conn1({(2,): 1}, residues=[0], rank=2)
        assert irregularity(c) == 4

    def test_zero_iff_regular_singular(self):
        for c in (REGULAR, KUMMER, EXP1, sum_conn(EXP1, KUMMER)):
            assert (irregularity(c) == 0) == is_regular_singular(c)


class TestRegularSingular:
    def test_all_zero_phi(self):
        assert is_regular_singular(REGULAR)
        assert is_regular_singular(KUMMER)

    def test_any_nonzero_phi(self):
        assert not is_regular_singular(EXP1)
        assert not is_regular_singular(sum_conn(REGULAR, EXP1))

    def test_empty_block_list(self):
        empty = FormalConnection.make(1, 1, [])
        assert is_regular_singular(empty)


class TestV0:
    def test_regular_stabilizes_at_zero(self):
        w = WeightWindow((-5,), (5,))
        assert v0_on_window(REGULAR, w).stabilization_index == 0

    def test_exp1_depth_five(self):
        w = WeightWindow((-5,), (5,))
        assert v0_on_window(EXP1, w).stabilization_index == 5

    def test_exp2_depth_three(self):
        w = WeightWindow((-5,), (5,))
        assert v0_on_window(EXP2, w).stabilization_index == 3


class TestShiftInvariance:
    def test_shifted_towers_are_nested_and_grow_same(self):
        # the recursion commutes with a uniform non-negative shift
        t = tower(EXP2, 3, WeightWindow((-14,), (14,)))
        for a in (1, 2):
            shifted = [tuple(tuple(x + a * m for x, m in zip(s, (2,)))
                             for s in lv) for lv in t.levels]
            for i in range(3):
                assert shifted[i] == t.levels[i + a]
