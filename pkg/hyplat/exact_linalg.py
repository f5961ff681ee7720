"""Exact integer and rational linear algebra.

Matrices are lists of rows and vectors are row vectors, matching the
x·A·x^tr convention used throughout the package. Integer entries are
plain ``int``; rational entries are ``fractions.Fraction``. Nothing in
here touches floating point.
"""
import logging
from fractions import Fraction
from functools import reduce
from math import floor, gcd
from typing import List, Sequence, Tuple, Union

import sympy
from sympy.matrices.normalforms import invariant_factors, smith_normal_decomp

from hyplat.errors import SingularError

logger = logging.getLogger(__name__)

Number = Union[int, Fraction]
Vector = List[Number]
Matrix = List[List[Number]]
IntMatrix = List[List[int]]

HALF = Fraction(1, 2)


# --- Basic helpers ---

def identity(n: int) -> IntMatrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def transpose(M: Sequence[Sequence[Number]]) -> Matrix:
    return [list(col) for col in zip(*M)]


def dot(u: Sequence[Number], v: Sequence[Number]) -> Number:
    return sum(a * b for a, b in zip(u, v))


def vec_mat(v: Sequence[Number], M: Sequence[Sequence[Number]]) -> Vector:
    cols = len(M[0]) if M else 0
    out = [0] * cols
    for a, row in zip(v, M):
        if a:
            for j in range(cols):
                out[j] += a * row[j]
    return out


def mat_mul(A: Sequence[Sequence[Number]], B: Sequence[Sequence[Number]]) -> Matrix:
    return [vec_mat(row, B) for row in A]


def bilinear(u: Sequence[Number], M: Sequence[Sequence[Number]], v: Sequence[Number]) -> Number:
    """u·M·v^tr."""
    return dot(vec_mat(u, M), v)


def column(v: Sequence[Number]) -> Matrix:
    return [[a] for a in v]


def block_diagonal(g: Sequence[Sequence[Number]], corner: Number = 1) -> Matrix:
    """diag(g, corner)."""
    n = len(g)
    out = [list(row) + [0] for row in g]
    out.append([0] * n + [corner])
    return out


def is_zero(v: Sequence[Number]) -> bool:
    return all(a == 0 for a in v)


def is_integral(M: Sequence[Sequence[Number]]) -> bool:
    return all(Fraction(a).denominator == 1 for row in M for a in row)


def to_int_matrix(M: Sequence[Sequence[Number]]) -> IntMatrix:
    if not is_integral(M):
        raise ValueError("matrix has non-integral entries")
    return [[int(a) for a in row] for row in M]


def to_fraction_matrix(M: Sequence[Sequence[Number]]) -> List[List[Fraction]]:
    return [[Fraction(a) for a in row] for row in M]


def is_symmetric(M: Sequence[Sequence[Number]]) -> bool:
    n = len(M)
    return all(len(row) == n for row in M) and all(M[i][j] == M[j][i] for i in range(n) for j in range(i))


def matrix_key(M: Sequence[Sequence[Number]]) -> Tuple:
    return tuple(tuple(row) for row in M)


# --- Content and primitivity ---

def content(v: Sequence[int]) -> int:
    return reduce(gcd, (abs(int(a)) for a in v), 0)


def primitive(v: Sequence[Number]) -> Tuple[List[int], Fraction]:
    """Return (w, c) with w = c·v integral and primitive, c > 0."""
    denominators = [Fraction(a).denominator for a in v]
    lcm = reduce(lambda a, b: a * b // gcd(a, b), denominators, 1)
    scaled = [int(Fraction(a) * lcm) for a in v]
    g = content(scaled)
    if g == 0:
        raise ValueError("zero vector has no primitive form")
    return [a // g for a in scaled], Fraction(lcm, g)


def sign_normalized(v: Sequence[int]) -> List[int]:
    """Flip v so that its first nonzero coordinate is positive."""
    for a in v:
        if a:
            return list(v) if a > 0 else [-b for b in v]
    return list(v)


# --- Row and column operations (in place) ---

def _row_sub(M, i, j, q):
    """row_i -= q·row_j."""
    Mi, Mj = M[i], M[j]
    for k in range(len(Mi)):
        Mi[k] -= q * Mj[k]


def _col_sub(M, i, j, q):
    """col_i -= q·col_j."""
    for row in M:
        row[i] -= q * row[j]


def _swap_rows(M, i, j):
    M[i], M[j] = M[j], M[i]


def _swap_cols(M, i, j):
    for row in M:
        row[i], row[j] = row[j], row[i]


def _negate_row(M, i):
    M[i] = [-a for a in M[i]]


# --- Determinants, inverses, ranks ---

def _to_sympy(M):
    return sympy.Matrix([[sympy.Rational(Fraction(a).numerator, Fraction(a).denominator) for a in row] for row in M])


def _from_sympy(x) -> Number:
    r = sympy.Rational(x)
    return int(r.p) if r.q == 1 else Fraction(int(r.p), int(r.q))


def det(M: Sequence[Sequence[Number]]) -> Number:
    if not M:
        return 1
    return _from_sympy(_to_sympy(M).det(method="bareiss"))


def adjugate(M: Sequence[Sequence[Number]]) -> Matrix:
    n = len(M)
    if n == 1:
        return [[1]]
    adj = _to_sympy(M).adjugate()
    return [[_from_sympy(adj[i, j]) for j in range(n)] for i in range(n)]


def _echelon(M, augment=None):
    """Fraction row echelon form; returns (rows, pivot columns, augmented rows)."""
    R = to_fraction_matrix(M)
    X = to_fraction_matrix(augment) if augment is not None else None
    pivots = []
    r = 0
    cols = len(R[0]) if R else 0
    for c in range(cols):
        p = next((i for i in range(r, len(R)) if R[i][c] != 0), None)
        if p is None:
            continue
        _swap_rows(R, r, p)
        if X is not None:
            _swap_rows(X, r, p)
        inv = 1 / R[r][c]
        R[r] = [a * inv for a in R[r]]
        if X is not None:
            X[r] = [a * inv for a in X[r]]
        for i in range(len(R)):
            if i != r and R[i][c] != 0:
                f = R[i][c]
                _row_sub(R, i, r, f)
                if X is not None:
                    _row_sub(X, i, r, f)
        pivots.append(c)
        r += 1
        if r == len(R):
            break
    return R, pivots, X


def rank(M: Sequence[Sequence[Number]]) -> int:
    if not M or not M[0]:
        return 0
    return len(_echelon(M)[1])


def inverse(M: Sequence[Sequence[Number]]) -> List[List[Fraction]]:
    n = len(M)
    R, pivots, X = _echelon(M, identity(n))
    if len(pivots) < n:
        raise ValueError("matrix is singular")
    return X


def int_inverse(M: Sequence[Sequence[int]]) -> IntMatrix:
    """Inverse of a unimodular integral matrix."""
    return to_int_matrix(inverse(M))


def is_unimodular(M: Sequence[Sequence[Number]]) -> bool:
    return is_integral(M) and abs(det(M)) == 1


def solve_left(K: Sequence[Sequence[Number]], w: Sequence[Number]) -> List[Fraction]:
    """Solve c·K = w for c; K must have independent rows."""
    R, pivots, X = _echelon(transpose(K), column(w))
    if len(pivots) < len(K):
        raise ValueError("rows of K are dependent")
    # rows past the rank must be consistent zeros
    for i in range(len(pivots), len(R)):
        if X[i][0] != 0:
            raise ValueError("w is not in the row space of K")
    c = [Fraction(0)] * len(K)
    for i, p in enumerate(pivots):
        c[p] = X[i][0]
    return c


# --- Hermite normal form ---

def hnf(M: Sequence[Sequence[int]]) -> Tuple[IntMatrix, IntMatrix]:
    """Row Hermite normal form H = U·M.

    H is lower echelon: zero rows first, then pivot rows in ascending pivot
    column, each row zero to the right of its pivot. Pivots are positive and
    the entries below a pivot lie in [0, pivot).
    """
    m = len(M)
    n = len(M[0]) if m else 0
    H = [[int(a) for a in row] for row in M]
    U = identity(m)
    active = list(range(m))
    pivots = []
    for col in range(n - 1, -1, -1):
        while True:
            nonzero = [i for i in active if H[i][col] != 0]
            if len(nonzero) <= 1:
                break
            i0 = min(nonzero, key=lambda i: (abs(H[i][col]), i))
            for i in nonzero:
                if i != i0:
                    q = H[i][col] // H[i0][col]
                    _row_sub(H, i, i0, q)
                    _row_sub(U, i, i0, q)
        if nonzero:
            i0 = nonzero[0]
            if H[i0][col] < 0:
                _negate_row(H, i0)
                _negate_row(U, i0)
            active.remove(i0)
            pivots.append((i0, col))

    pivots.reverse()
    order = active + [i for i, _ in pivots]
    H = [H[i] for i in order]
    U = [U[i] for i in order]

    top = len(active)
    for t in range(len(pivots) - 1, -1, -1):
        r, c = top + t, pivots[t][1]
        p = H[r][c]
        for s in range(r + 1, m):
            q = H[s][c] // p
            if q:
                _row_sub(H, s, r, q)
                _row_sub(U, s, r, q)
    return H, U


def is_hnf(H: Sequence[Sequence[int]]) -> bool:
    m = len(H)
    n = len(H[0]) if m else 0
    last_pivot = -1
    seen_pivot = False
    pivot_at = []
    for r, row in enumerate(H):
        nz = [j for j in range(n) if row[j] != 0]
        if not nz:
            if seen_pivot:
                return False
            continue
        seen_pivot = True
        p = nz[-1]
        if p <= last_pivot or row[p] <= 0:
            return False
        last_pivot = p
        pivot_at.append((r, p))
    for r, p in pivot_at:
        for s in range(r + 1, m):
            if not 0 <= H[s][p] < H[r][p]:
                return False
    return True


def kernel_saturated(M: Sequence[Sequence[int]]) -> IntMatrix:
    """Basis (in HNF) of the saturated lattice {v in Z^n : v·M = 0}."""
    H, U = hnf(M)
    z = sum(1 for row in H if is_zero(row))
    if z == 0:
        return []
    return hnf(U[:z])[0]


def orthogonal_complement(v: Sequence[int]) -> IntMatrix:
    """Saturated basis of {w in Z^n : w·v^tr = 0}."""
    return kernel_saturated(column(v))


def lattice_basis(rows: Sequence[Sequence[int]]) -> IntMatrix:
    """Nonzero rows of the HNF, a canonical basis of the lattice the rows span."""
    H, _ = hnf(rows)
    return [row for row in H if not is_zero(row)]


def canonical_lattice_key(rows: Sequence[Sequence[Number]]) -> Tuple:
    """Hashable canonical form of the lattice spanned by rational rows."""
    denominators = [Fraction(a).denominator for row in rows for a in row]
    scale = reduce(lambda a, b: a * b // gcd(a, b), denominators, 1)
    scaled = [[int(Fraction(a) * scale) for a in row] for row in rows]
    return (scale,) + matrix_key(lattice_basis(scaled))


# --- Smith normal form ---

def snf(M: Sequence[Sequence[int]]) -> Tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Smith normal form S = U·M·V with d_i | d_{i+1} and d_i >= 0."""
    S, U, V = smith_normal_decomp(sympy.Matrix(M), domain=sympy.ZZ)
    S, U, V = (_int_rows(X) for X in (S, U, V))
    for i in range(min(len(S), len(V))):
        if S[i][i] < 0:
            _negate_row(S, i)
            _negate_row(U, i)
    return S, U, V


def elementary_divisors(M: Sequence[Sequence[int]]) -> List[int]:
    return [abs(int(d)) for d in invariant_factors(sympy.Matrix(M), domain=sympy.ZZ) if d != 0]


def _int_rows(X) -> IntMatrix:
    return [[int(X[i, j]) for j in range(X.cols)] for i in range(X.rows)]


# --- LLL on Gram matrices ---

def _gram_schmidt(G):
    """Exact Gram–Schmidt data (mu, B) of a Gram matrix; raises on a non-positive B_i."""
    n = len(G)
    mu = [[Fraction(0)] * n for _ in range(n)]
    B = [Fraction(0)] * n
    for i in range(n):
        for j in range(i):
            s = Fraction(G[i][j])
            for k in range(j):
                s -= mu[j][k] * mu[i][k] * B[k]
            mu[i][j] = s / B[j]
        s = Fraction(G[i][i])
        for k in range(i):
            s -= mu[i][k] * mu[i][k] * B[k]
        if s <= 0:
            raise ValueError("Gram matrix is not positive definite")
        B[i] = s
        mu[i][i] = Fraction(1)
    return mu, B


def check_positive_definite(G: Sequence[Sequence[Number]]) -> None:
    if not G or not is_symmetric(G):
        raise ValueError("Gram matrix must be square and symmetric")
    _gram_schmidt(G)


def _sym_sub(G, i, j, q):
    """Basis change b_i -= q·b_j applied to a Gram matrix."""
    _row_sub(G, i, j, q)
    _col_sub(G, i, j, q)


def _sym_swap(G, i, j):
    _swap_rows(G, i, j)
    _swap_cols(G, i, j)


def lll_reduce(G: Sequence[Sequence[Number]], delta: Fraction = Fraction(3, 4)) -> Tuple[List[List[Fraction]], IntMatrix]:
    """LLL-reduce a positive definite Gram matrix: returns (U·G·U^tr, U)."""
    check_positive_definite(G)
    n = len(G)
    G = to_fraction_matrix(G)
    U = identity(n)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            mu, _ = _gram_schmidt(G)
            if abs(mu[k][j]) > HALF:
                q = floor(mu[k][j] + HALF)
                _sym_sub(G, k, j, q)
                _row_sub(U, k, j, q)
        mu, B = _gram_schmidt(G)
        if B[k] >= (delta - mu[k][k - 1] ** 2) * B[k - 1]:
            k += 1
        else:
            _sym_swap(G, k, k - 1)
            _swap_rows(U, k, k - 1)
            k = max(k - 1, 1)
    return G, U


# --- Rational diagonalization ---

def _sym_add(M, T, i, j, f):
    """row/col i += f·row/col j on M, row i += f·row j on T."""
    _row_sub(M, i, j, -f)
    _col_sub(M, i, j, -f)
    _row_sub(T, i, j, -f)


def rational_diagonalize(A: Sequence[Sequence[int]]) -> Tuple[List[List[Fraction]], List[Fraction]]:
    """Symmetric Gaussian elimination: T·A·T^tr = diag."""
    if not is_symmetric(A):
        raise ValueError("matrix must be symmetric")
    n = len(A)
    M = to_fraction_matrix(A)
    T = to_fraction_matrix(identity(n))
    for i in range(n):
        if M[i][i] == 0:
            j = next((j for j in range(i + 1, n) if M[j][j] != 0), None)
            if j is not None:
                _sym_swap(M, i, j)
                _swap_rows(T, i, j)
            else:
                j = next((j for j in range(i + 1, n) if M[i][j] != 0), None)
                if j is None:
                    raise SingularError("matrix is singular")
                _sym_add(M, T, i, j, 1)
        for j in range(i + 1, n):
            if M[j][i] != 0:
                _sym_add(M, T, j, i, -M[j][i] / M[i][i])
    return T, [M[i][i] for i in range(n)]
