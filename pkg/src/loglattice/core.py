"""Exact arithmetic kernel: weight-windowed Laurent series, sparse rational
matrices, and finite complexes of Q-vector spaces.

Everything here is immutable after construction and all operations are pure,
so values can be shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

Exponent = tuple[int, ...]


class CoreError(Exception):
    pass


class VariableMismatch(CoreError):
    pass


class IndexOutOfRange(CoreError):
    pass


class NotAComplex(CoreError):
    """d∘d != 0; carries the offending degree."""

    def __init__(self, degree: int):
        self.degree = degree
        super().__init__(f"d∘d != 0 at degree {degree}")


def rat(x) -> Fraction:
    """Coerce int / "p/q" string / Fraction to an exact rational."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise CoreError(f"not an exact rational: {x!r}")


@dataclass(frozen=True)
class WeightWindow:
    """Box [lo, hi] of exponent vectors; the finite stage all series live on."""

    lo: Exponent
    hi: Exponent

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise VariableMismatch("lo/hi length mismatch")
        if any(a > b for a, b in zip(self.lo, self.hi)):
            raise CoreError(f"empty window: lo={self.lo} hi={self.hi}")

    @property
    def n_vars(self) -> int:
        return len(self.lo)

    def contains(self, e: Exponent) -> bool:
        return all(a <= x <= b for a, x, b in zip(self.lo, e, self.hi))

    def enlarge(self, k: int) -> "WeightWindow":
        return WeightWindow(tuple(a - k for a in self.lo), tuple(b + k for b in self.hi))

    def interior(self, margin: int) -> "WeightWindow":
        lo = tuple(a + margin for a in self.lo)
        hi = tuple(b - margin for b in self.hi)
        return WeightWindow(lo, hi)

    def points(self) -> Iterable[Exponent]:
        """All exponents in the box, lexicographic.  Use on small windows only."""
        def rec(i: int, prefix: tuple):
            if i == self.n_vars:
                yield prefix
                return
            for v in range(self.lo[i], self.hi[i] + 1):
                yield from rec(i + 1, prefix + (v,))
        yield from rec(0, ())


class TruncatedLaurentSeries:
    """Sparse Laurent polynomial confined to a weight window.

    Coefficients outside the window are silently discarded; the ``truncated``
    flag records whether any discard happened (it does not take part in
    equality).
    """

    __slots__ = ("window", "coeffs", "truncated")

    def __init__(self, window: WeightWindow, coeffs: Mapping[Exponent, Fraction],
                 truncated: bool = False):
        clean = {}
        trunc = truncated
        for e, c in coeffs.items():
            e = tuple(e)
            if len(e) != window.n_vars:
                raise VariableMismatch(f"exponent {e} has wrong arity")
            c = rat(c)
            if c == 0:
                continue
            if window.contains(e):
                clean[e] = c
            else:
                trunc = True
        self.window = window
        self.coeffs = clean
        self.truncated = trunc

    @classmethod
    def zero(cls, window: WeightWindow) -> "TruncatedLaurentSeries":
        return cls(window, {})

    @classmethod
    def monomial(cls, window: WeightWindow, e: Exponent, c=1) -> "TruncatedLaurentSeries":
        return cls(window, {tuple(e): rat(c)})

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other) -> bool:
        return (isinstance(other, TruncatedLaurentSeries)
                and self.window == other.window and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.window, frozenset(self.coeffs.items())))

    def __add__(self, other: "TruncatedLaurentSeries") -> "TruncatedLaurentSeries":
        if self.window != other.window:
            raise VariableMismatch("window mismatch in addition")
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            s = out.get(e, Fraction(0)) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return TruncatedLaurentSeries(self.window, out,
                                      self.truncated or other.truncated)

    def scale(self, c) -> "TruncatedLaurentSeries":
        c = rat(c)
        if c == 0:
            return TruncatedLaurentSeries.zero(self.window)
        return TruncatedLaurentSeries(self.window,
                                      {e: c * v for e, v in self.coeffs.items()},
                                      self.truncated)

    def __repr__(self):
        if not self.coeffs:
            return "0"
        bits = []
        for e in sorted(self.coeffs):
            mono = "·".join(f"x{i}^{p}" for i, p in enumerate(e) if p) or "1"
            bits.append(f"{self.coeffs[e]}*{mono}")
        return " + ".join(bits)


def series_mul(a: TruncatedLaurentSeries, b: TruncatedLaurentSeries,
               w: WeightWindow) -> TruncatedLaurentSeries:
    """Exact product, exponents outside ``w`` discarded (truncation flagged)."""
    if a.window.n_vars != w.n_vars or b.window.n_vars != w.n_vars:
        raise VariableMismatch("operands do not share the window arity")
    out: dict[Exponent, Fraction] = {}
    trunc = a.truncated or b.truncated
    for ea, ca in a.coeffs.items():
        for eb, cb in b.coeffs.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            if not w.contains(e):
                trunc = True
                continue
            s = out.get(e, Fraction(0)) + ca * cb
            if s:
                out[e] = s
            else:
                del out[e]
    return TruncatedLaurentSeries(w, out, trunc)


def log_derivation(f: TruncatedLaurentSeries, i: int) -> TruncatedLaurentSeries:
    """x_i ∂_{x_i}: the monomial x^α is an eigenvector with eigenvalue α_i.

    Window-preserving, never loses terms.
    """
    if not (0 <= i < f.window.n_vars):
        raise IndexOutOfRange(f"variable index {i} out of range")
    out = {}
    for e, c in f.coeffs.items():
        if e[i]:
            out[e] = c * e[i]
    return TruncatedLaurentSeries(f.window, out, f.truncated)


# ---------------------------------------------------------------------------
# sparse matrices over Q


class SparseMatrixQ:
    """Immutable sparse matrix over Q, entries indexed (row, col)."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int,
                 entries: Mapping[tuple[int, int], Fraction] | None = None):
        if rows < 0 or cols < 0:
            raise CoreError("negative matrix dimensions")
        clean = {}
        for (i, j), v in (entries or {}).items():
            if not (0 <= i < rows and 0 <= j < cols):
                raise IndexOutOfRange(f"entry ({i},{j}) outside {rows}x{cols}")
            v = rat(v)
            if v:
                clean[(i, j)] = v
        self.rows = rows
        self.cols = cols
        self.entries = clean

    @classmethod
    def identity(cls, n: int) -> "SparseMatrixQ":
        return cls(n, n, {(i, i): Fraction(1) for i in range(n)})

    @classmethod
    def zero(cls, rows: int, cols: int) -> "SparseMatrixQ":
        return cls(rows, cols, {})

    def is_zero(self) -> bool:
        return not self.entries

    def __eq__(self, other):
        return (isinstance(other, SparseMatrixQ) and self.rows == other.rows
                and self.cols == other.cols and self.entries == other.entries)

    def __hash__(self):
        return hash((self.rows, self.cols, frozenset(self.entries.items())))

    def transpose(self) -> "SparseMatrixQ":
        return SparseMatrixQ(self.cols, self.rows,
                             {(j, i): v for (i, j), v in self.entries.items()})

    def mul(self, other: "SparseMatrixQ") -> "SparseMatrixQ":
        if self.cols != other.rows:
            raise CoreError("matrix shape mismatch in product")
        by_row: dict[int, list[tuple[int, Fraction]]] = {}
        for (i, j), v in other.entries.items():
            by_row.setdefault(i, []).append((j, v))
        out: dict[tuple[int, int], Fraction] = {}
        for (i, k), v in self.entries.items():
            for j, w in by_row.get(k, ()):
                key = (i, j)
                s = out.get(key, Fraction(0)) + v * w
                if s:
                    out[key] = s
                else:
                    del out[key]
        return SparseMatrixQ(self.rows, other.cols, out)

    def restrict_cols(self, keep: Sequence[int]) -> "SparseMatrixQ":
        pos = {c: k for k, c in enumerate(keep)}
        ent = {(i, pos[j]): v for (i, j), v in self.entries.items() if j in pos}
        return SparseMatrixQ(self.rows, len(keep), ent)

    def restrict_rows(self, keep: Sequence[int]) -> "SparseMatrixQ":
        pos = {r: k for k, r in enumerate(keep)}
        ent = {(pos[i], j): v for (i, j), v in self.entries.items() if i in pos}
        return SparseMatrixQ(len(keep), self.cols, ent)

    def hstack(self, other: "SparseMatrixQ") -> "SparseMatrixQ":
        if self.rows != other.rows:
            raise CoreError("hstack row mismatch")
        ent = dict(self.entries)
        for (i, j), v in other.entries.items():
            ent[(i, j + self.cols)] = v
        return SparseMatrixQ(self.rows, self.cols + other.cols, ent)

    def vstack(self, other: "SparseMatrixQ") -> "SparseMatrixQ":
        if self.cols != other.cols:
            raise CoreError("vstack col mismatch")
        ent = dict(self.entries)
        for (i, j), v in other.entries.items():
            ent[(i + self.rows, j)] = v
        return SparseMatrixQ(self.rows + other.rows, self.cols, ent)

    def column(self, j: int) -> dict[int, Fraction]:
        return {i: v for (i, jj), v in self.entries.items() if jj == j}

    def __repr__(self):
        return f"SparseMatrixQ({self.rows}x{self.cols}, nnz={len(self.entries)})"


def _integer_rows(M: SparseMatrixQ) -> list[dict[int, int]]:
    """Rows as integer dicts, each row scaled by its lcm of denominators."""
    rows: dict[int, dict[int, Fraction]] = {}
    for (i, j), v in M.entries.items():
        rows.setdefault(i, {})[j] = v
    out = []
    for r in rows.values():
        scale = 1
        for v in r.values():
            d = v.denominator
            g = _gcd(scale, d)
            scale = scale // g * d
        out.append({j: int(v * scale) for j, v in r.items()})
    return out


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


def rank_q(M: SparseMatrixQ) -> int:
    """Exact rank over Q by one-step fraction-free (Bareiss) elimination.

    Rows are cleared to integers first; full pivoting is allowed, the
    two-row update keeps every entry an exact minor quotient.
    """
    rows = [r for r in _integer_rows(M) if r]
    prev = 1
    rank = 0
    while rows:
        # sparsest row first, then smallest pivot magnitude for growth control
        pi = min(range(len(rows)), key=lambda k: len(rows[k]))
        prow = rows.pop(pi)
        pc = min(prow, key=lambda j: (abs(prow[j]), j))
        piv = prow[pc]
        rank += 1
        nxt = []
        for r in rows:
            f = r.get(pc)
            if f is None:
                if prev == 1:
                    new = {j: piv * v for j, v in r.items()}
                else:
                    new = {}
                    for j, v in r.items():
                        q, rem = divmod(piv * v, prev)
                        assert rem == 0, "fraction-free update not integral"
                        if q:
                            new[j] = q
            else:
                new = {}
                for j in r.keys() | prow.keys():
                    num = piv * r.get(j, 0) - f * prow.get(j, 0)
                    if num == 0:
                        continue
                    q, rem = divmod(num, prev)
                    assert rem == 0, "fraction-free update not integral"
                    new[j] = q
                new.pop(pc, None)
            if new:
                nxt.append(new)
        rows = nxt
        prev = piv
    return rank


def nullity(M: SparseMatrixQ) -> int:
    return M.cols - rank_q(M)


# ---------------------------------------------------------------------------
# finite complexes


class FiniteComplex:
    """Bounded complex of free Q-modules with explicit bases.

    ``spaces[k]`` is the basis label list in degree ``min_degree + k`` and
    ``differentials[k]`` the matrix of d from that degree to the next.
    d∘d = 0 is checked exactly at construction time.
    """

    def __init__(self, min_degree: int, spaces: Sequence[Sequence],
                 differentials: Sequence[SparseMatrixQ]):
        if len(differentials) != max(len(spaces) - 1, 0):
            raise CoreError("need one differential per consecutive pair of degrees")
        for k, d in enumerate(differentials):
            if d.cols != len(spaces[k]) or d.rows != len(spaces[k + 1]):
                raise CoreError(f"differential {k} has wrong shape")
        self.min_degree = min_degree
        self.spaces = [list(s) for s in spaces]
        self.differentials = list(differentials)
        for k in range(len(differentials) - 1):
            if not differentials[k + 1].mul(differentials[k]).is_zero():
                raise NotAComplex(min_degree + k)

    @property
    def degrees(self) -> range:
        return range(self.min_degree, self.min_degree + len(self.spaces))

    def space(self, degree: int) -> list:
        return self.spaces[degree - self.min_degree]

    def differential(self, degree: int) -> SparseMatrixQ:
        """d: C^degree -> C^{degree+1}; zero map at the top."""
        k = degree - self.min_degree
        if 0 <= k < len(self.differentials):
            return self.differentials[k]
        if k == len(self.spaces) - 1:
            return SparseMatrixQ.zero(0, len(self.spaces[k]))
        raise IndexOutOfRange(f"degree {degree} not in complex")

    def _incoming(self, degree: int) -> SparseMatrixQ:
        k = degree - self.min_degree
        if k == 0:
            return SparseMatrixQ.zero(len(self.spaces[0]), 0)
        return self.differentials[k - 1]

    def cohomology(self) -> dict[int, int]:
        """dim H^k = dim ker d_k − rank d_{k−1}, raw (no band restriction)."""
        ranks = [rank_q(d) for d in self.differentials]
        out = {}
        for idx, basis in enumerate(self.spaces):
            k = self.min_degree + idx
            r_out = ranks[idx] if idx < len(ranks) else 0
            r_in = ranks[idx - 1] if idx > 0 else 0
            out[k] = len(basis) - r_out - r_in
        return out

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * len(self.space(k)) for k in self.degrees)

    def band_cohomology(self, interior: Mapping[int, Sequence[int]]) -> dict[int, int]:
        """Cohomology measured on an interior band of each degree.

        ``interior[k]`` lists the basis indices regarded as interior in
        degree k.  Reported in degree k is

            dim Z_B − dim(Z_B ∩ (im d + J)),

        where Z_B is the space of cycles supported on the band and J is the
        span of the collar (non-interior) basis vectors.  Classes that exist
        only because the window cut a recursion at its boundary land in J and
        are quotiented away; genuinely formal classes survive.
        """
        out = {}
        for k in self.degrees:
            idx = sorted(interior.get(k, range(len(self.space(k)))))
            out[k] = self._band_h(k, idx)
        return out

    def _band_h(self, degree: int, interior_idx: Sequence[int]) -> int:
        n_k = len(self.space(degree))
        d_out = self.differential(degree)
        d_in = self._incoming(degree)
        band = list(interior_idx)
        collar = [j for j in range(n_k) if j not in set(band)]
        dim_zb = len(band) - rank_q(d_out.restrict_cols(band))
        # G = [d_in | E_collar]; dim(Z_B ∩ colspan G) = rank G − rank [MG; P_J G]
        ej = SparseMatrixQ(n_k, len(collar),
                           {(r, i): Fraction(1) for i, r in enumerate(collar)})
        G = d_in.hstack(ej)
        MG = SparseMatrixQ.zero(d_out.rows, d_in.cols).hstack(d_out.restrict_cols(collar))
        PJG = G.restrict_rows(collar)
        meet = rank_q(G) - rank_q(MG.vstack(PJG))
        return dim_zb - meet


def complex_cohomology(C: FiniteComplex) -> dict[int, int]:
    """Raw cohomology dimensions per degree (d∘d = 0 already certified)."""
    return C.cohomology()


def ker_coker_dims(M: SparseMatrixQ) -> tuple[int, int]:
    """(dim ker, dim coker) of an exact linear map, no truncation anywhere."""
    r = rank_q(M)
    return M.cols - r, M.rows - r
