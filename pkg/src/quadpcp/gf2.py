"""Dense linear algebra over GF(2) on bit-packed Python integers.

Vectors of length ``n`` are stored as ints whose bit ``i`` is coordinate ``i``
(0-indexed).  Matrices are stored row-major: entry ``(i, j)`` of an
``rows x cols`` matrix lives at bit ``i * cols + j``.  The same int is the
flattened vector of the matrix, so subspaces of matrix spaces are handled
with the vector code unchanged.

Inner products are popcount parities.  Row reduction always pivots on the
highest set bit of a row.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence


class ShapeError(ValueError):
    """Raised when operands have incompatible dimensions."""


def parity(x: int) -> int:
    return x.bit_count() & 1


def dot(x: int, y: int) -> int:
    """Inner product of two packed vectors (mod 2)."""
    return (x & y).bit_count() & 1


def _mask(n: int) -> int:
    return (1 << n) - 1


# ---------- vectors


@dataclass(frozen=True)
class BitVector:
    dim: int
    bits: int

    def __post_init__(self):
        if self.dim < 1:
            raise ShapeError("vector dimension must be positive")
        if self.bits >> self.dim:
            raise ShapeError(f"bits do not fit in dimension {self.dim}")

    @classmethod
    def from_list(cls, values: Sequence[int]) -> BitVector:
        bits = 0
        for i, b in enumerate(values):
            if b & 1:
                bits |= 1 << i
        return cls(len(values), bits)

    @classmethod
    def zero(cls, dim: int) -> BitVector:
        return cls(dim, 0)

    @classmethod
    def unit(cls, dim: int, i: int) -> BitVector:
        """Standard basis vector with coordinate ``i`` (0-indexed) set."""
        return cls(dim, 1 << i)

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.dim:
            raise IndexError(i)
        return (self.bits >> i) & 1

    def __add__(self, other: BitVector) -> BitVector:
        if self.dim != other.dim:
            raise ShapeError(f"cannot add vectors of length {self.dim} and {other.dim}")
        return BitVector(self.dim, self.bits ^ other.bits)

    def dot(self, other: BitVector) -> int:
        if self.dim != other.dim:
            raise ShapeError("dimension mismatch in inner product")
        return dot(self.bits, other.bits)

    def to_list(self) -> list[int]:
        return [(self.bits >> i) & 1 for i in range(self.dim)]

    def is_zero(self) -> bool:
        return self.bits == 0


# ---------- matrices


@dataclass(frozen=True)
class BitMatrix:
    rows: int
    cols: int
    bits: int

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ShapeError("matrix dimensions must be positive")
        if self.bits >> (self.rows * self.cols):
            raise ShapeError("bits do not fit in the matrix shape")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> BitMatrix:
        nr = len(rows)
        nc = len(rows[0]) if nr else 0
        bits = 0
        for i, row in enumerate(rows):
            if len(row) != nc:
                raise ShapeError("ragged matrix")
            for j, b in enumerate(row):
                if b & 1:
                    bits |= 1 << (i * nc + j)
        return cls(nr, nc, bits)

    @classmethod
    def zero(cls, rows: int, cols: int | None = None) -> BitMatrix:
        return cls(rows, rows if cols is None else cols, 0)

    @classmethod
    def identity(cls, n: int) -> BitMatrix:
        bits = 0
        for i in range(n):
            bits |= 1 << (i * n + i)
        return cls(n, n, bits)

    @classmethod
    def from_flat(cls, v: BitVector, rows: int, cols: int) -> BitMatrix:
        if v.dim != rows * cols:
            raise ShapeError("flattened length does not match shape")
        return cls(rows, cols, v.bits)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(ij)
        return (self.bits >> (i * self.cols + j)) & 1

    def row(self, i: int) -> int:
        return (self.bits >> (i * self.cols)) & _mask(self.cols)

    def row_ints(self) -> list[int]:
        return [self.row(i) for i in range(self.rows)]

    def to_rows(self) -> list[list[int]]:
        return [[self[i, j] for j in range(self.cols)] for i in range(self.rows)]

    def flat(self) -> BitVector:
        return BitVector(self.rows * self.cols, self.bits)

    def _check_same(self, other: BitMatrix) -> None:
        if self.shape != other.shape:
            raise ShapeError(f"shape mismatch: {self.shape} vs {other.shape}")

    def __add__(self, other: BitMatrix) -> BitMatrix:
        self._check_same(other)
        return BitMatrix(self.rows, self.cols, self.bits ^ other.bits)

    @property
    def T(self) -> BitMatrix:
        return BitMatrix(self.cols, self.rows, transpose_bits(self.bits, self.rows, self.cols))

    def __matmul__(self, other):
        if isinstance(other, BitVector):
            if other.dim != self.cols:
                raise ShapeError("matrix-vector shape mismatch")
            return BitVector(self.rows, matvec_bits(self.bits, self.rows, self.cols, other.bits))
        if other.rows != self.cols:
            raise ShapeError(f"cannot multiply {self.shape} by {other.shape}")
        return BitMatrix(
            self.rows, other.cols, matmul_bits(self.bits, self.rows, self.cols, other.bits, other.cols)
        )

    def is_symmetric(self) -> bool:
        return self.rows == self.cols and transpose_bits(self.bits, self.rows, self.cols) == self.bits

    def is_zero(self) -> bool:
        return self.bits == 0

    def rank(self) -> int:
        return rank(self)


def transpose_bits(bits: int, rows: int, cols: int) -> int:
    out = 0
    for i in range(rows):
        r = (bits >> (i * cols)) & _mask(cols)
        while r:
            j = (r & -r).bit_length() - 1
            out |= 1 << (j * rows + i)
            r &= r - 1
    return out


def matvec_bits(bits: int, rows: int, cols: int, x: int) -> int:
    out = 0
    m = _mask(cols)
    for i in range(rows):
        if ((bits >> (i * cols)) & m & x).bit_count() & 1:
            out |= 1 << i
    return out


def matmul_bits(a: int, ar: int, ac: int, b: int, bc: int) -> int:
    brow = [(b >> (k * bc)) & _mask(bc) for k in range(ac)]
    out = 0
    for i in range(ar):
        r = (a >> (i * ac)) & _mask(ac)
        acc = 0
        while r:
            k = (r & -r).bit_length() - 1
            acc ^= brow[k]
            r &= r - 1
        out |= acc << (i * bc)
    return out


def outer_bits(x: int, y: int, m: int, n: int | None = None) -> int:
    """Packed ``x (x) y`` for ``x`` of length ``m`` and ``y`` of length ``n``."""
    n = m if n is None else n
    out = 0
    for i in range(m):
        if (x >> i) & 1:
            out |= y << (i * n)
    return out


def outer_product(x: BitVector, y: BitVector) -> BitMatrix:
    """Rank-at-most-one matrix with entries ``x[i] * y[j]``."""
    return BitMatrix(x.dim, y.dim, outer_bits(x.bits, y.bits, x.dim, y.dim))


def mat_inner(X: BitMatrix, Y: BitMatrix) -> int:
    """Trace inner product ``sum_ij X_ij Y_ij`` over GF(2)."""
    X._check_same(Y)
    return dot(X.bits, Y.bits)


# ---------- elimination


def echelon(vectors: Iterable[int]) -> dict[int, int]:
    """Fully reduced echelon basis of ``span(vectors)``, keyed by pivot bit.

    Every pivot bit is set in exactly one basis vector.
    """
    piv: dict[int, int] = {}
    for v in vectors:
        v = _reduce_full(v, piv)
        if not v:
            continue
        p = v.bit_length() - 1
        for q, b in list(piv.items()):
            if (b >> p) & 1:
                piv[q] = b ^ v
        piv[p] = v
    return piv


def _reduce_full(x: int, piv: dict[int, int]) -> int:
    for p, b in piv.items():
        if (x >> p) & 1:
            x ^= b
    return x


def rank_of_rows(rows: Iterable[int]) -> int:
    return len(echelon(rows))


def rank(A: BitMatrix) -> int:
    """Rank over GF(2)."""
    return rank_of_rows(A.row_ints())


def rank_bits(bits: int, rows: int, cols: int) -> int:
    m = _mask(cols)
    return rank_of_rows((bits >> (i * cols)) & m for i in range(rows))


def solve_affine(rows: Sequence[int], rhs: Sequence[int]) -> tuple[bool, int]:
    """Consistency and rank of the system ``<rows[i], x> = rhs[i]``.

    Returns ``(consistent, rank)``.  When consistent the solution set is an
    affine subspace of codimension ``rank``.
    """
    if len(rows) != len(rhs):
        raise ShapeError("one right-hand side bit per equation")
    # rhs in bit 0, coefficients shifted above it: with highest-bit pivots
    # the system is inconsistent iff the pure rhs vector 1 is a basis vector
    piv = echelon((r << 1) | (b & 1) for r, b in zip(rows, rhs))
    consistent = 0 not in piv
    rk = len(piv) - (0 if consistent else 1)
    return consistent, rk


def affine_solution_probability(rows: Sequence[int], rhs: Sequence[int]) -> Fraction:
    """Probability that a uniform ``x`` satisfies ``<rows[i], x> = rhs[i]`` for all i."""
    ok, rk = solve_affine(rows, rhs)
    return Fraction(1, 1 << rk) if ok else Fraction(0)


# ---------- subspaces


@dataclass(frozen=True)
class Subspace:
    """A subspace of ``GF(2)^ambient_dim`` held as a fully reduced echelon basis."""

    ambient_dim: int
    basis: tuple[int, ...]

    @classmethod
    def span(cls, ambient_dim: int, generators: Iterable[int]) -> Subspace:
        gens = list(generators)
        for g in gens:
            if g >> ambient_dim:
                raise ShapeError("generator does not fit in the ambient space")
        piv = echelon(gens)
        return cls(ambient_dim, tuple(piv[p] for p in sorted(piv, reverse=True)))

    @classmethod
    def zero(cls, ambient_dim: int) -> Subspace:
        return cls(ambient_dim, ())

    @classmethod
    def full(cls, ambient_dim: int) -> Subspace:
        return cls.span(ambient_dim, (1 << i for i in range(ambient_dim)))

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def pivots(self) -> tuple[int, ...]:
        return tuple(b.bit_length() - 1 for b in self.basis)

    @property
    def free_positions(self) -> tuple[int, ...]:
        piv = set(self.pivots)
        return tuple(i for i in range(self.ambient_dim) if i not in piv)

    def reduce(self, x: int) -> int:
        """Canonical coset representative: ``x`` with all pivot bits cleared."""
        for b in self.basis:
            if (x >> (b.bit_length() - 1)) & 1:
                x ^= b
        return x

    def __contains__(self, x: int) -> bool:
        return self.reduce(x) == 0

    def elements(self) -> Iterator[int]:
        for mask in range(1 << self.dim):
            v = 0
            i = 0
            while mask:
                if mask & 1:
                    v ^= self.basis[i]
                mask >>= 1
                i += 1
            yield v

    def dual(self) -> Subspace:
        return dual(self)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self.basis == other.basis

    def __hash__(self) -> int:
        return hash((self.ambient_dim, self.basis))


def dual(S: Subspace) -> Subspace:
    """Orthogonal complement under the standard dot product."""
    pivots = S.pivots
    gens = []
    for f in S.free_positions:
        y = 1 << f
        for p, b in zip(pivots, S.basis):
            if (b >> f) & 1:
                y |= 1 << p
        gens.append(y)
    return Subspace.span(S.ambient_dim, gens)


def kernel(A: BitMatrix) -> Subspace:
    """Null space ``{x : Ax = 0}`` of ``A``."""
    return dual(Subspace.span(A.cols, A.row_ints()))


def coset_rep(x: BitVector, S: Subspace) -> BitVector:
    if x.dim != S.ambient_dim:
        raise ShapeError("vector and subspace live in different spaces")
    return BitVector(x.dim, S.reduce(x.bits))


def compress(x: int, positions: Sequence[int]) -> int:
    """Gather the bits of ``x`` at ``positions`` into a dense int (like pext)."""
    out = 0
    for k, p in enumerate(positions):
        if (x >> p) & 1:
            out |= 1 << k
    return out


def expand(y: int, positions: Sequence[int]) -> int:
    out = 0
    for k, p in enumerate(positions):
        if (y >> k) & 1:
            out |= 1 << p
    return out


# ---------- linear maps between matrix spaces


class MatrixSpaceMap:
    """A linear map ``GF(2)^{m x m} -> GF(2)^{r x r}``.

    Built either as a conjugation ``alpha -> rho alpha rho^T`` or from an
    explicit ``r^2 x m^2`` matrix acting on flattened inputs.  The map must
    send symmetric matrices to symmetric matrices; a general matrix that
    does not is rejected.
    """

    def __init__(self, m: int, r: int, matrix: BitMatrix, rho: BitMatrix | None = None):
        if matrix.shape != (r * r, m * m):
            raise ShapeError(f"map matrix must be {r * r}x{m * m}, got {matrix.shape}")
        self.m = m
        self.r = r
        self.rho = rho
        self.matrix = matrix
        rows = matrix.row_ints()
        # image of each input basis matrix, for XOR-accumulated application
        self._images = tuple(
            sum(((rows[t] >> j) & 1) << t for t in range(r * r)) for j in range(m * m)
        )
        self._adjoint_images = tuple(rows)
        if rho is None and not self.preserves_symmetry():
            raise ValueError("matrix-space map does not send symmetric matrices to symmetric ones")

    def _key(self):
        return (self.m, self.r, self.matrix.bits, None if self.rho is None else self.rho.bits)

    def __eq__(self, other) -> bool:
        return isinstance(other, MatrixSpaceMap) and self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        form = f"rho={self.rho.to_rows()}" if self.rho is not None else f"matrix={self.matrix.to_rows()}"
        return f"MatrixSpaceMap(m={self.m}, r={self.r}, {form})"

    @classmethod
    def conjugation(cls, rho: BitMatrix) -> MatrixSpaceMap:
        r, m = rho.shape
        images = []
        for j in range(m * m):
            images.append(_conj_bits(rho.bits, r, m, 1 << j))
        cols = [[(images[j] >> t) & 1 for j in range(m * m)] for t in range(r * r)]
        return cls(m, r, BitMatrix.from_rows(cols), rho=rho)

    @classmethod
    def general(cls, m: int, r: int, matrix: BitMatrix) -> MatrixSpaceMap:
        return cls(m, r, matrix)

    @property
    def is_conjugation(self) -> bool:
        return self.rho is not None

    def apply_bits(self, x: int) -> int:
        out = 0
        imgs = self._images
        while x:
            j = (x & -x).bit_length() - 1
            out ^= imgs[j]
            x &= x - 1
        return out

    def adjoint_bits(self, X: int) -> int:
        out = 0
        imgs = self._adjoint_images
        while X:
            t = (X & -X).bit_length() - 1
            out ^= imgs[t]
            X &= X - 1
        return out

    def __call__(self, M: BitMatrix) -> BitMatrix:
        if M.shape != (self.m, self.m):
            raise ShapeError(f"expected {self.m}x{self.m} input")
        return BitMatrix(self.r, self.r, self.apply_bits(M.bits))

    def preserves_symmetry(self) -> bool:
        m, r = self.m, self.r
        for M in symmetric_basis(m):
            if transpose_bits(self.apply_bits(M), r, r) != self.apply_bits(M):
                return False
        return True


def _conj_bits(rho: int, r: int, m: int, alpha: int) -> int:
    """``rho alpha rho^T`` on packed ints."""
    t = matmul_bits(rho, r, m, alpha, m)
    return matmul_bits(t, r, m, transpose_bits(rho, r, m), r)


def adjoint_apply(X: BitMatrix, pi: MatrixSpaceMap) -> BitMatrix:
    """The unique ``Z`` with ``<Z, Y> = <X, pi(Y)>`` for every ``Y``."""
    if X.shape != (pi.r, pi.r):
        raise ShapeError(f"expected {pi.r}x{pi.r} input")
    if pi.rho is not None:
        return pi.rho.T @ X @ pi.rho
    return BitMatrix(pi.m, pi.m, pi.adjoint_bits(X.bits))


def symmetric_basis(m: int) -> list[int]:
    """Packed basis of the symmetric ``m x m`` matrices."""
    out = []
    for i in range(m):
        for j in range(i, m):
            out.append((1 << (i * m + j)) | (1 << (j * m + i)))
    return out


def symmetry_functionals(m: int) -> list[int]:
    """Functionals whose common kernel is the symmetric subspace."""
    return [(1 << (i * m + j)) | (1 << (j * m + i)) for i in range(m) for j in range(i + 1, m)]


def solution_count(alpha: BitMatrix, b: BitVector) -> int:
    """Number of ``x`` with ``alpha x = b``, by elimination."""
    if b.dim != alpha.rows:
        raise ShapeError("right-hand side has the wrong length")
    ok, rk = solve_affine(alpha.row_ints(), b.to_list())
    return (1 << (alpha.cols - rk)) if ok else 0
