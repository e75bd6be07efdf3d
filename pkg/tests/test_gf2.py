import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quadpcp.gf2 import (
    BitMatrix,
    BitVector,
    MatrixSpaceMap,
    ShapeError,
    Subspace,
    adjoint_apply,
    coset_rep,
    dual,
    kernel,
    mat_inner,
    outer_product,
    rank,
    solution_count,
    symmetric_basis,
)


def brute_rank(rows):
    """Rank by enumerating the span (independent of the elimination code)."""
    span = {0}
    for r in rows:
        span |= {s ^ r for s in span}
    return len(span).bit_length() - 1


def matrices(m, n=None):
    n = n or m
    return st.integers(0, (1 << (m * n)) - 1).map(lambda b: BitMatrix(m, n, b))


# ---------- vectors and matrices


def test_vector_basics():
    x = BitVector.from_list([1, 0, 1])
    assert x.to_list() == [1, 0, 1]
    assert (x + x).is_zero()
    assert x.dot(BitVector.from_list([1, 1, 1])) == 0
    with pytest.raises(ShapeError):
        x + BitVector.zero(2)
    with pytest.raises(ValueError):
        BitVector(0, 0)


def test_outer_product_examples():
    x = BitVector.from_list([1, 0, 1])
    y = BitVector.from_list([1, 1, 0])
    assert outer_product(x, y).to_rows() == [[1, 1, 0], [0, 0, 0], [1, 1, 0]]
    assert outer_product(BitVector.zero(3), y).is_zero()
    ones = outer_product(BitVector.from_list([1, 1]), BitVector.from_list([1, 1]))
    assert ones.to_rows() == [[1, 1], [1, 1]]
    assert ones.rank() == 1


def test_mat_inner_examples():
    I2 = BitMatrix.identity(2)
    assert mat_inner(I2, I2) == 0
    X = BitMatrix.from_rows([[1, 1, 0], [0, 1, 1], [1, 0, 1]])
    assert mat_inner(X, BitMatrix.zero(3)) == 0
    with pytest.raises(ShapeError):
        mat_inner(I2, BitMatrix.identity(3))


def test_inner_with_outer_is_bilinear_form():
    rng = random.Random(5)
    for _ in range(20):
        a = BitMatrix(3, 3, rng.getrandbits(9))
        for xb, yb in itertools.product(range(8), repeat=2):
            x, y = BitVector(3, xb), BitVector(3, yb)
            # x^T a y, computed entry by entry
            want = sum(x[i] * a[i, j] * y[j] for i in range(3) for j in range(3)) % 2
            assert mat_inner(a, outer_product(x, y)) == want


def test_inner_hand_example():
    x = BitVector.from_list([1, 0, 1])
    X = outer_product(BitVector.unit(3, 0), BitVector.unit(3, 2))
    assert mat_inner(X, outer_product(x, x)) == x[0] * x[2] == 1


def test_rank_examples():
    assert BitMatrix.from_rows([[1, 1], [1, 1]]).rank() == 1
    for m in range(1, 6):
        assert rank(BitMatrix.identity(m)) == m
    for xb in range(1, 16):
        x = BitVector(4, xb)
        assert outer_product(x, x).rank() == 1
    assert BitMatrix.zero(3).rank() == 0


@given(matrices(3, 4))
def test_rank_matches_span_size(A):
    assert A.rank() == brute_rank(A.row_ints())
    assert A.rank() <= min(A.shape)
    assert A.T.rank() == A.rank()


@given(matrices(3), matrices(3))
def test_matrix_algebra(A, B):
    assert (A + A).is_zero()
    assert A.T.T == A
    assert (A @ B).T == B.T @ A.T
    assert mat_inner(A, B) == mat_inner(B, A)


@settings(max_examples=50)
@given(st.integers(1, 4).flatmap(lambda m: st.tuples(st.just(m), matrices(m), st.integers(0, (1 << m) - 1))))
def test_solution_count_is_zero_or_power(args):
    m, A, b = args
    count = sum((A @ BitVector(m, x)).bits == b for x in range(1 << m))
    assert solution_count(A, BitVector(m, b)) == count
    assert count in (0, 1 << (m - A.rank()))


# ---------- subspaces


def test_kernel_examples():
    assert kernel(BitMatrix.identity(3)).dim == 0
    assert kernel(BitMatrix.zero(2)).dim == 2
    K = kernel(BitMatrix.from_rows([[1, 1], [0, 0]]))
    assert sorted(K.elements()) == [0, 0b11]


@given(matrices(3, 5))
def test_kernel_dimension(A):
    K = kernel(A)
    assert K.dim == 5 - A.rank()
    for x in K.elements():
        assert (A @ BitVector(5, x)).is_zero()


def test_dual_examples():
    assert dual(Subspace.full(4)).dim == 0
    assert dual(Subspace.zero(4)).dim == 4
    D = dual(Subspace.span(4, [0b0001]))
    assert D.dim == 3
    assert all(not x & 1 for x in D.elements())
    # members are exactly the vectors orthogonal to the generator, by enumeration
    assert sorted(D.elements()) == [x for x in range(16) if not x & 1]


@given(st.integers(1, 9).flatmap(lambda n: st.tuples(st.just(n), st.lists(st.integers(0, (1 << n) - 1), max_size=6))))
def test_dual_is_involution(args):
    n, gens = args
    S = Subspace.span(n, gens)
    assert S.dim + dual(S).dim == n
    assert dual(dual(S)) == S
    assert S.dim == brute_rank(gens)


def test_coset_rep_examples():
    S = Subspace.span(4, [0b0011, 0b0101])
    for s in S.elements():
        assert coset_rep(BitVector(4, s), S).is_zero()
    x = BitVector(4, 0b1010)
    assert coset_rep(x, Subspace.zero(4)) == x
    with pytest.raises(ShapeError):
        coset_rep(BitVector(3, 1), S)


def test_coset_rep_is_canonical():
    rng = random.Random(11)
    for _ in range(1000):
        n = rng.randint(1, 9)
        S = Subspace.span(n, [rng.getrandbits(n) for _ in range(rng.randint(0, n))])
        x = BitVector(n, rng.getrandbits(n))
        s = rng.choice(list(S.elements()))
        assert coset_rep(x + BitVector(n, s), S) == coset_rep(x, S)
        y = BitVector(n, rng.getrandbits(n))
        assert (coset_rep(x, S) == coset_rep(y, S)) == ((x + y).bits in S)


# ---------- matrix-space maps


def test_conjugation_adjoint_exhaustive():
    for rho_bits in range(16):
        rho = BitMatrix(2, 2, rho_bits)
        pi = MatrixSpaceMap.conjugation(rho)
        for Xb in range(16):
            X = BitMatrix(2, 2, Xb)
            Z = adjoint_apply(X, pi)
            assert Z == rho.T @ X @ rho
            for Yb in range(16):
                Y = BitMatrix(2, 2, Yb)
                assert mat_inner(Z, Y) == mat_inner(X, pi(Y))
                assert pi(Y) == rho @ Y @ rho.T


def test_adjoint_exhaustive_m3_r2():
    rng = random.Random(3)
    for _ in range(10):
        rho = BitMatrix(2, 3, rng.getrandbits(6))
        pi = MatrixSpaceMap.conjugation(rho)
        for Xb in range(16):
            X = BitMatrix(2, 2, Xb)
            Z = adjoint_apply(X, pi)
            assert all(mat_inner(Z, BitMatrix(3, 3, y)) == mat_inner(X, pi(BitMatrix(3, 3, y))) for y in range(512))


def test_adjoint_trivial_cases():
    pi = MatrixSpaceMap.conjugation(BitMatrix.identity(3))
    X = BitMatrix(3, 3, 0b101110011)
    assert adjoint_apply(X, pi) == X
    assert adjoint_apply(BitMatrix.zero(3), pi).is_zero()
    with pytest.raises(ShapeError):
        adjoint_apply(BitMatrix.zero(2), pi)


def test_general_map_matches_conjugation_and_checks_symmetry():
    rho = BitMatrix.from_rows([[1, 1, 0], [0, 1, 1]])
    conj = MatrixSpaceMap.conjugation(rho)
    gen = MatrixSpaceMap.general(3, 2, conj.matrix)
    for a in range(512):
        assert gen.apply_bits(a) == conj.apply_bits(a)
    for Xb in range(16):
        assert gen.adjoint_bits(Xb) == adjoint_apply(BitMatrix(2, 2, Xb), conj).bits
    # keeping only the (0, 1) output entry breaks symmetry
    rows = [[0] * 4 for _ in range(4)]
    rows[1][0] = 1
    with pytest.raises(ValueError):
        MatrixSpaceMap.general(2, 2, BitMatrix.from_rows(rows))


@given(st.integers(0, (1 << 8) - 1), st.integers(0, (1 << 16) - 1), st.integers(0, (1 << 16) - 1))
def test_maps_are_linear_and_keep_symmetry(rho_bits, a, b):
    pi = MatrixSpaceMap.conjugation(BitMatrix(2, 4, rho_bits))
    assert pi.apply_bits(a ^ b) == pi.apply_bits(a) ^ pi.apply_bits(b)
    for s in symmetric_basis(4):
        assert BitMatrix(2, 2, pi.apply_bits(s)).is_symmetric()
