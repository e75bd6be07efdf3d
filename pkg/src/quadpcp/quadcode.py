"""Quadratic code, folding over ``H_v``, and Fourier transforms of folded tables.

A coloring of the big-side vertex ``v`` is a table indexed by cosets of
``H_v``, the annihilator of ``W_v`` (symmetric ``m x m`` matrices that
satisfy ``C_v``).  Extending the table to all matrices gives a function
constant on cosets, hence with Fourier support inside ``W_v``.

Coset indices: the canonical representative of ``X`` is ``X`` reduced by
the echelon basis of ``H_v`` (pivot bits cleared).  Its remaining free bits,
packed low to high, form the dense index, so indices order representatives
by their integer value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from quadpcp.gf2 import (
    BitMatrix,
    BitVector,
    ShapeError,
    Subspace,
    compress,
    dot,
    dual,
    expand,
    outer_bits,
    symmetry_functionals,
)

MAX_TRANSFORM_BITS = 16
ZERO_THRESHOLD = 1e-12


def encode_quadratic(x: BitVector):
    """The codeword ``X -> <X, x (x) x>`` as a callable on ``m x m`` matrices."""
    m = x.dim
    xx = outer_bits(x.bits, x.bits, m)

    def A(X: BitMatrix) -> int:
        if X.shape != (m, m):
            raise ShapeError(f"quadratic code of length-{m} vector takes {m}x{m} matrices")
        return dot(X.bits, xx)

    A.label = x
    return A


@dataclass(frozen=True)
class FoldingSpace:
    v: int
    m: int
    H: Subspace
    W: Subspace

    @property
    def n_bits(self) -> int:
        return self.m * self.m

    @property
    def coset_count(self) -> int:
        return 1 << (self.n_bits - self.H.dim)

    @cached_property
    def free(self) -> tuple[int, ...]:
        return self.H.free_positions

    def rep(self, X: int) -> int:
        return self.H.reduce(X)

    def index(self, X: int) -> int:
        return compress(self.H.reduce(X), self.free)

    def rep_of(self, idx: int) -> int:
        return expand(idx, self.free)

    @cached_property
    def index_table(self) -> np.ndarray:
        """Coset index of every packed matrix (needs ``m^2 <= 20``)."""
        n = self.n_bits
        if n > 20:
            raise ValueError("index table too large")
        # the coset map is linear, so build it from images of unit vectors
        out = np.zeros(1 << n, dtype=np.int64)
        for j in range(n):
            out[1 << j : 1 << (j + 1)] = out[: 1 << j] ^ self.index(1 << j)
        return out

    @classmethod
    def trivial(cls, v: int, m: int) -> FoldingSpace:
        """No folding at all: every matrix is its own coset."""
        n = m * m
        return cls(v, m, Subspace.zero(n), Subspace.full(n))


def build_folding_space(m: int, constraints: Sequence[int], v: int = 0) -> FoldingSpace:
    """``W`` = symmetric matrices in the common kernel of ``constraints``; ``H = W^perp``."""
    n = m * m
    for c in constraints:
        if c >> n:
            raise ShapeError("constraint does not fit an m x m matrix")
    W = dual(Subspace.span(n, list(symmetry_functionals(m)) + list(constraints)))
    return FoldingSpace(v, m, dual(W), W)


def folding_spaces(inst) -> tuple[FoldingSpace, ...]:
    return tuple(build_folding_space(inst.m, inst.constraints[v], v) for v in range(inst.n_v))


# ---------- colorings


def pack_pair(c1: int, c2: int) -> int:
    return (c1 << 1) | c2


def unpack_pair(c: int) -> tuple[int, int]:
    return (c >> 1) & 1, c & 1


@dataclass(frozen=True)
class FoldedColoring:
    """Per-vertex color tables over cosets (mode 28) or coset pairs (mode 44).

    In mode 44 the table for ``v`` is indexed by ``q1 * coset_count + q2`` and
    a color ``(c1, c2)`` is stored as ``2 * c1 + c2``.

    ``expected`` holds the subspaces the Fourier support should lie in.  It
    differs from ``spaces[v].W`` only for deliberately unfolded functions.
    """

    mode: int
    spaces: tuple[FoldingSpace, ...]
    tables: tuple[np.ndarray, ...]
    expected: tuple[Subspace, ...] = field(default=())

    def __post_init__(self):
        if self.mode not in (28, 44):
            raise ValueError("mode must be 28 or 44")
        if len(self.tables) != len(self.spaces):
            raise ShapeError("one table per vertex")
        for sp, t in zip(self.spaces, self.tables):
            size = sp.coset_count if self.mode == 28 else sp.coset_count**2
            if len(t) != size:
                raise ShapeError(f"table for vertex {sp.v} has {len(t)} entries, expected {size}")
            t.setflags(write=False)
        if not self.expected:
            object.__setattr__(self, "expected", tuple(sp.W for sp in self.spaces))

    @property
    def n_colors(self) -> int:
        return 2 if self.mode == 28 else 4

    @property
    def is_indicator(self) -> bool:
        return all(np.isin(t, (0, 1)).all() for t in self.tables)

    @property
    def is_folded(self) -> bool:
        return all(sp.W == w for sp, w in zip(self.spaces, self.expected))

    def densities(self) -> list[Fraction]:
        """Fraction of cosets (or coset pairs) with color 1 (0/1 tables only)."""
        return [Fraction(int(t.sum()), len(t)) for t in self.tables]

    def color_fractions(self, v: int) -> dict[int, Fraction]:
        t = self.tables[v]
        return {c: Fraction(int((t == c).sum()), len(t)) for c in range(self.n_colors)}

    def indicator(self, color: int) -> FoldedColoring:
        """0/1 coloring marking the vertices with the given color."""
        return FoldedColoring(
            self.mode, self.spaces, tuple((t == color).astype(np.int64) for t in self.tables), self.expected
        )

    def complement(self) -> FoldedColoring:
        if not self.is_indicator:
            raise ValueError("complement needs a 0/1 table")
        return FoldedColoring(self.mode, self.spaces, tuple(1 - t for t in self.tables), self.expected)

    def extension(self, v: int) -> np.ndarray:
        """Table on all matrices (mode 28) or matrix pairs ``X1 | X2 << m^2`` (mode 44)."""
        sp = self.spaces[v]
        idx = sp.index_table
        if self.mode == 28:
            return self.tables[v][idx]
        cc = sp.coset_count
        pair = (idx[None, :] * cc + idx[:, None]).reshape(-1)  # row X2, column X1
        return self.tables[v][pair]

    # constructors

    @classmethod
    def from_tables(cls, mode: int, spaces, tables) -> FoldedColoring:
        return cls(mode, tuple(spaces), tuple(np.asarray(t, dtype=np.int64) for t in tables))

    @classmethod
    def constant(cls, mode: int, spaces, color: int) -> FoldedColoring:
        size = (lambda sp: sp.coset_count) if mode == 28 else (lambda sp: sp.coset_count**2)
        return cls.from_tables(mode, spaces, [np.full(size(sp), color) for sp in spaces])

    @classmethod
    def random(cls, mode: int, spaces, rng: np.random.Generator, p: float = 0.5, colors: int = 2):
        size = (lambda sp: sp.coset_count) if mode == 28 else (lambda sp: sp.coset_count**2)
        if colors == 2:
            tabs = [(rng.random(size(sp)) < p).astype(np.int64) for sp in spaces]
        else:
            tabs = [rng.integers(0, colors, size(sp)) for sp in spaces]
        return cls.from_tables(mode, spaces, tabs)

    @classmethod
    def honest(cls, mode: int, spaces, labeling) -> FoldedColoring:
        """Quadratic-code coloring ``X -> <X, y_v (x) y_v>`` (paired in mode 44)."""
        tabs = []
        for sp in spaces:
            y = labeling.y[sp.v]
            yy = outer_bits(y.bits, y.bits, sp.m)
            if yy not in sp.W:
                raise ValueError(f"y_v (x) y_v is not in W for vertex {sp.v}")
            a = np.array([dot(sp.rep_of(i), yy) for i in range(sp.coset_count)], dtype=np.int64)
            if mode == 28:
                tabs.append(a)
            else:
                tabs.append((2 * a[:, None] + a[None, :]).reshape(-1))
        return cls.from_tables(mode, spaces, tabs)

    @classmethod
    def unfolded(cls, spaces, full_tables) -> FoldedColoring:
        """Mode-28 function given on every matrix, checked against the real ``W``."""
        triv = tuple(FoldingSpace.trivial(sp.v, sp.m) for sp in spaces)
        return cls(28, triv, tuple(np.asarray(t, dtype=np.int64) for t in full_tables), tuple(sp.W for sp in spaces))


def evaluate_folded(col: FoldedColoring, v: int, X) -> int:
    """Color at matrix ``X`` (mode 28) or matrix pair ``(X1, X2)`` (mode 44)."""
    if not 0 <= v < len(col.spaces):
        raise KeyError(f"unknown vertex {v}")
    sp = col.spaces[v]
    if col.mode == 28:
        if X.shape != (sp.m, sp.m):
            raise ShapeError("query has the wrong shape")
        return int(col.tables[v][sp.index(X.bits)])
    X1, X2 = X
    if X1.shape != (sp.m, sp.m) or X2.shape != (sp.m, sp.m):
        raise ShapeError("query has the wrong shape")
    return int(col.tables[v][sp.index(X1.bits) * sp.coset_count + sp.index(X2.bits)])


# ---------- Fourier


def walsh_hadamard(a: np.ndarray) -> np.ndarray:
    """Unnormalized transform ``out[s] = sum_x a[x] (-1)^{popcount(s & x)}``."""
    out = np.array(a, dtype=np.int64)
    n = out.shape[0]
    if n & (n - 1):
        raise ValueError("length must be a power of two")
    h = 1
    while h < n:
        view = out.reshape(-1, 2, h)
        lo = view[:, 0, :].copy()
        view[:, 0, :] += view[:, 1, :]
        view[:, 1, :] = lo - view[:, 1, :]
        h *= 2
    return out


@dataclass(frozen=True)
class Spectrum:
    """Exact dyadic Fourier coefficients ``num[alpha] / 2^log2_den``."""

    num: np.ndarray
    log2_den: int

    def coefficient(self, alpha: int) -> Fraction:
        return Fraction(int(self.num[alpha]), 1 << self.log2_den)

    def as_float(self) -> np.ndarray:
        return self.num / float(1 << self.log2_den)

    def support(self) -> list[int]:
        return [int(a) for a in np.flatnonzero(self.num)]

    def mass(self) -> Fraction:
        """Sum of squared coefficients."""
        return Fraction(int((self.num.astype(object) ** 2).sum()), 1 << (2 * self.log2_den))


def fourier_transform(col: FoldedColoring, v: int) -> Spectrum:
    """Fourier coefficients ``E_X A(X) (-1)^{<alpha, X>}`` of a 0/1 mode-28 table.

    In mode 44 the argument is a 0/1 table on matrix pairs and ``alpha``
    packs ``(alpha1, alpha2)`` as ``alpha1 | alpha2 << m^2``.
    """
    sp = col.spaces[v]
    bits = sp.n_bits if col.mode == 28 else 2 * sp.n_bits
    if bits > MAX_TRANSFORM_BITS:
        raise ValueError(f"transform over 2^{bits} points exceeds the 2^{MAX_TRANSFORM_BITS} limit")
    ext = col.extension(v)
    if not np.isin(ext, (0, 1)).all():
        raise ValueError("Fourier transform needs a 0/1-valued table")
    return Spectrum(walsh_hadamard(ext), bits)


def check_folding_support(col: FoldedColoring, v: int) -> bool:
    """Whether every character with nonzero weight lies in ``W_v`` (``W_v x W_v`` in mode 44)."""
    W = col.expected[v]
    n = col.spaces[v].n_bits
    tables = [col] if col.mode == 28 else [col.indicator(c) for c in range(4)]
    for c in tables:
        spec = fourier_transform(c, v)
        for a in np.flatnonzero(np.abs(spec.as_float()) > ZERO_THRESHOLD):
            a = int(a)
            if col.mode == 28:
                if a not in W:
                    return False
            elif (a & ((1 << n) - 1)) not in W or (a >> n) not in W:
                return False
    return True
