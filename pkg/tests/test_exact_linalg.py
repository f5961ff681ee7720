from fractions import Fraction

import pytest
import sympy

from hyplat.errors import SingularError
from hyplat.exact_linalg import (
    adjugate, canonical_lattice_key, content, det, elementary_divisors, hnf, identity, int_inverse,
    inverse, is_hnf, is_unimodular, kernel_saturated, lll_reduce, mat_mul, orthogonal_complement,
    primitive, rank, rational_diagonalize, sign_normalized, snf, solve_left, to_int_matrix, transpose,
    vec_mat,
)

A = [[-1, -3, -1], [-3, 14, 8], [-1, 8, 11]]


def test_det_and_adjugate_match_sympy():
    M = sympy.Matrix(A)
    assert det(A) == int(M.det()) == -155
    assert adjugate(A) == [[int(a) for a in row] for row in M.adjugate().tolist()]


def test_inverse_is_exact():
    inv = inverse(A)
    assert mat_mul(A, inv) == identity(3)
    assert all(isinstance(a, Fraction) for row in inv for a in row)


def test_inverse_of_singular_matrix_raises():
    with pytest.raises(ValueError):
        inverse([[1, 2], [2, 4]])


def test_rank():
    assert rank([[1, 2, 3], [2, 4, 6]]) == 1
    assert rank(A) == 3
    assert rank([[0, 0]]) == 0


def test_solve_left():
    K = [[1, 0, 1], [0, 1, 1]]
    c = solve_left(K, [2, 3, 5])
    assert c == [2, 3]
    with pytest.raises(ValueError):
        solve_left(K, [1, 0, 0])


def test_hnf_properties():
    M = [[4, 6, 2], [2, 8, 4], [6, 2, 2], [1, 1, 1]]
    H, U = hnf(M)
    assert mat_mul(U, M) == H
    assert is_unimodular(U)
    assert is_hnf(H)
    # rank 3 input in 4 rows: exactly one zero row, placed first
    assert H[0] == [0, 0, 0]


def test_hnf_same_lattice_same_key():
    basis = [[2, 0], [0, 3]]
    other = [[2, 3], [4, 3]]
    assert canonical_lattice_key(basis) == canonical_lattice_key(other)
    assert canonical_lattice_key(basis) != canonical_lattice_key([[1, 0], [0, 3]])


def test_canonical_key_of_rational_rows():
    half = [[Fraction(1, 2), 0], [0, 1]]
    assert canonical_lattice_key(half) == canonical_lattice_key([[Fraction(-1, 2), 0], [3, 1]])


def test_is_hnf_rejects_unreduced():
    assert is_hnf([[1, 0], [0, 2]])
    assert not is_hnf([[1, 0], [2, 2]])
    assert not is_hnf([[-1, 0], [0, 1]])


def test_snf_classic_example():
    M = [[2, 4, 4], [-6, 6, 12], [10, -4, -16]]
    S, U, V = snf(M)
    assert mat_mul(mat_mul(U, M), V) == S
    assert [S[i][i] for i in range(3)] == [2, 6, 12]
    assert is_unimodular(U) and is_unimodular(V)


def test_elementary_divisors_divide():
    d = elementary_divisors([[4, 0, 0], [0, 6, 0], [0, 0, 1]])
    assert d == [1, 2, 12]


def test_snf_of_indefinite_gram_has_nonnegative_diagonal():
    A = [[17, -17, 20, -9], [-17, -25, 15, -6], [20, 15, 4, -2], [-9, -6, -2, 1]]
    S, U, V = snf(A)
    assert mat_mul(mat_mul(U, A), V) == S
    assert [S[i][i] for i in range(4)] == [1, 1, 1, 32]
    assert all(S[i][j] == 0 for i in range(4) for j in range(4) if i != j)
    assert is_unimodular(U) and is_unimodular(V)
    assert elementary_divisors(A) == [1, 1, 1, 32]
    assert all(type(a) is int for row in U for a in row)


def test_kernel_saturated():
    K = kernel_saturated(transpose([[2, 4, 6]]))
    assert len(K) == 2
    for v in K:
        assert sum(a * b for a, b in zip(v, [2, 4, 6])) == 0
    # saturated: the kernel lattice has index 1 in its rational span
    assert elementary_divisors(K) == [1, 1]


def test_orthogonal_complement():
    W = orthogonal_complement([1, 2, 3])
    assert len(W) == 2
    assert all(w[0] + 2 * w[1] + 3 * w[2] == 0 for w in W)


def test_primitive_and_content():
    assert content([4, -6, 8]) == 2
    assert primitive([Fraction(1, 2), 1]) == ([1, 2], Fraction(2))
    assert primitive([4, -6]) == ([2, -3], Fraction(1, 2))
    with pytest.raises(ValueError):
        primitive([0, 0])


def test_sign_normalized():
    assert sign_normalized([0, -1, 2]) == [0, 1, -2]
    assert sign_normalized([3, -1]) == [3, -1]


def test_lll_recovers_standard_basis():
    G = [[1, 1000], [1000, 1000001]]
    reduced, U = lll_reduce(G)
    assert reduced == identity(2)
    assert mat_mul(mat_mul(U, G), transpose(U)) == reduced
    assert is_unimodular(U)


def test_lll_rejects_indefinite():
    with pytest.raises(ValueError):
        lll_reduce([[1, 0], [0, -1]])


def test_int_inverse():
    g = [[1, 0, 0], [6, -1, 0], [2, 0, -1]]
    assert mat_mul(g, int_inverse(g)) == identity(3)
    with pytest.raises(ValueError):
        int_inverse([[2, 0], [0, 1]])


def test_rational_diagonalize():
    T, diagonal = rational_diagonalize(A)
    D = mat_mul(mat_mul(T, A), transpose(T))
    assert D == [[diagonal[i] if i == j else 0 for j in range(3)] for i in range(3)]
    assert sum(1 for a in diagonal if a < 0) == 1


def test_rational_diagonalize_zero_diagonal():
    T, diagonal = rational_diagonalize([[0, 1], [1, 0]])
    assert sorted(a > 0 for a in diagonal) == [False, True]


def test_rational_diagonalize_singular():
    with pytest.raises(SingularError):
        rational_diagonalize([[0, 0], [0, 0]])


def test_to_int_matrix():
    assert to_int_matrix([[Fraction(4, 2)]]) == [[2]]
    with pytest.raises(ValueError):
        to_int_matrix([[Fraction(1, 2)]])
    assert vec_mat([1, 1], [[1, 2], [3, 4]]) == [4, 6]
