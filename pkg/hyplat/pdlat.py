"""Positive definite lattices: short and close vectors, automorphisms, isometries."""
import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import floor
from typing import List, Optional, Sequence, Tuple

from hyplat import config
from hyplat.exact_linalg import (
    IntMatrix, Matrix, Number, bilinear, check_positive_definite, det, identity, int_inverse,
    lll_reduce, mat_mul, matrix_key, sign_normalized, to_fraction_matrix, to_int_matrix,
    vec_mat,
)
from hyplat.orbits import orbit

logger = logging.getLogger(__name__)


@dataclass
class PDLattice:
    """Z^rank with a positive definite rational Gram matrix."""
    gram: Matrix

    def __post_init__(self):
        check_positive_definite(self.gram)
        self.gram = to_fraction_matrix(self.gram)

    @property
    def rank(self) -> int:
        return len(self.gram)

    @cached_property
    def determinant(self) -> Number:
        return det(self.gram)

    @cached_property
    def _reduced(self):
        G, U = lll_reduce(self.gram)
        return G, U, int_inverse(U), _cholesky(G)

    def norm(self, v: Sequence[Number]) -> Number:
        return bilinear(v, self.gram, v)


@dataclass
class FiniteMatrixGroup:
    """Finite group of integral matrices preserving `gram`; order is None when not computed."""
    generators: List[IntMatrix]
    gram: Matrix
    order: Optional[int] = None
    _elements: Optional[list] = field(default=None, repr=False, compare=False)

    @property
    def degree(self) -> int:
        return len(self.gram)

    def elements(self, cap: Optional[int] = None) -> List[IntMatrix]:
        """All elements by closure; raises OrbitBudgetError past `cap`."""
        if self._elements is None:
            cap = config.GROUP_ORDER_CAP if cap is None else cap
            one = identity(self.degree)
            found = orbit(one, self.generators, mat_mul, matrix_key, mat_mul, one, budget=cap)
            self._elements = found.points
        return self._elements


# --- Enumeration ---

def _cholesky(G):
    """Fincke–Pohst coefficients: Q(z) = sum_i q_ii (z_i + sum_{j>i} q_ij z_j)^2."""
    n = len(G)
    Q = to_fraction_matrix(G)
    for i in range(n):
        for j in range(i + 1, n):
            Q[j][i] = Q[i][j]
            Q[i][j] = Q[i][j] / Q[i][i]
        for k in range(i + 1, n):
            for l in range(k, n):
                Q[k][l] -= Q[k][i] * Q[i][l]
    return Q


def _enumerate(Q, center: Sequence[Fraction], bound: Fraction) -> List[Tuple[List[int], Fraction]]:
    """All integral w with (w - center) in the ellipsoid Q <= bound, with exact distances."""
    n = len(Q)
    w = [0] * n
    out = []

    def level(i, remaining):
        s = sum((Q[i][j] * (w[j] - center[j]) for j in range(i + 1, n)), Fraction(0))
        c = center[i] - s
        q = Q[i][i]
        start = floor(c)
        values = []
        v = start
        while q * (v - c) ** 2 <= remaining:
            values.append(v)
            v -= 1
        v = start + 1
        while q * (v - c) ** 2 <= remaining:
            values.append(v)
            v += 1
        for v in sorted(values):
            w[i] = v
            left = remaining - q * (v - c) ** 2
            if i == 0:
                out.append((list(w), bound - left))
            else:
                level(i - 1, left)
        w[i] = 0

    level(n - 1, Fraction(bound))
    return out


def _all_vectors(L: PDLattice, bound) -> List[Tuple[List[int], Fraction]]:
    """Every nonzero v (both signs) of norm <= bound, in the LLL-reduced basis."""
    G, _, _, Q = L._reduced
    return [(w, d) for w, d in _enumerate(Q, [Fraction(0)] * L.rank, Fraction(bound)) if any(w)]


def short_vectors(L: PDLattice, bound) -> List[Tuple[List[int], Fraction]]:
    """Nonzero v with v·G·v^tr <= bound, one per ±pair, lex ordered."""
    bound = Fraction(bound)
    if bound < 0:
        raise ValueError("bound must be non-negative")
    _, U, _, _ = L._reduced
    found = {}
    for w, norm in _all_vectors(L, bound):
        v = tuple(sign_normalized(vec_mat(w, U)))
        found[v] = norm
    return [(list(v), found[v]) for v in sorted(found)]


def close_vectors(L: PDLattice, target: Sequence[Number], bound) -> List[Tuple[List[int], Fraction]]:
    """Lattice vectors v with (v - target)·G·(v - target)^tr <= bound, lex ordered."""
    bound = Fraction(bound)
    if bound < 0:
        raise ValueError("bound must be non-negative")
    _, U, U_inv, Q = L._reduced
    center = vec_mat([Fraction(t) for t in target], U_inv)
    found = [(vec_mat(w, U), d) for w, d in _enumerate(Q, center, bound)]
    found.sort(key=lambda item: item[0])
    return found


# --- Automorphisms and isometries ---

def _fingerprints(G, vectors):
    """Per vector, the multiset of inner products against the whole vector set."""
    images = [vec_mat(v, G) for v in vectors]
    prints = []
    for a in images:
        counts = Counter(sum(x * y for x, y in zip(a, u)) for u in vectors)
        prints.append(tuple(sorted(counts.items())))
    return prints


def _candidates(G_target, target_prints, G_source, vectors, prints):
    """Per basis index i, the vectors that may serve as the image of e_i."""
    n = len(G_target)
    out = []
    for i in range(n):
        norm = G_target[i][i]
        out.append([v for v, p in zip(vectors, prints)
                    if p == target_prints[i] and bilinear(v, G_source, v) == norm])
    return out


def _extend(G_target, G_source, candidates, rows):
    """Backtrack rows k = len(rows).. so that rows·G_source·rows^tr = G_target."""
    k = len(rows)
    if k == len(G_target):
        return [list(r) for r in rows]
    for c in candidates[k]:
        image = vec_mat(c, G_source)
        if all(sum(x * y for x, y in zip(image, rows[j])) == G_target[k][j] for j in range(k)):
            found = _extend(G_target, G_source, candidates, rows + [c])
            if found is not None:
                return found
    return None


def _vector_orbit(v, generators):
    return set(orbit(tuple(v), generators, lambda p, g: tuple(vec_mat(p, g)), lambda p: p,
                     lambda a, b: None, None, budget=10**9).index)


def automorphism_group(L: PDLattice) -> FiniteMatrixGroup:
    """Full integral automorphism group via a stabilizer-chain backtrack.

    The order is the product of the basic orbit lengths, so no element
    enumeration is needed.
    """
    G, U, U_inv, _ = L._reduced
    n = L.rank
    bound = max(G[i][i] for i in range(n))
    vectors = [w for w, _ in _all_vectors(L, bound)]
    prints = _fingerprints(G, vectors)
    by_vector = dict(zip(map(tuple, vectors), prints))
    basis = identity(n)
    basis_prints = [by_vector[tuple(e)] for e in basis]
    candidates = _candidates(G, basis_prints, G, vectors, prints)

    generators = []
    order = 1
    for level in range(n - 1, -1, -1):
        fixed = basis[:level]
        reached = _vector_orbit(basis[level], generators)
        for c in candidates[level]:
            if tuple(c) in reached:
                continue
            image = vec_mat(c, G)
            if any(sum(x * y for x, y in zip(image, e)) != G[level][j] for j, e in enumerate(fixed)):
                continue
            g = _extend(G, G, candidates, fixed + [c])
            if g is not None:
                generators.append(g)
                reached = _vector_orbit(basis[level], generators)
        order *= len(reached)

    gens = [to_int_matrix(mat_mul(mat_mul(U_inv, g), U)) for g in generators]
    logger.debug(f"automorphism group of rank {n} lattice: order {order}, {len(gens)} generators")
    return FiniteMatrixGroup(gens, L.gram, order)


def isometry(L1: PDLattice, L2: PDLattice) -> Optional[IntMatrix]:
    """Some integral g with g·G2·g^tr = G1, or None."""
    if L1.rank != L2.rank or L1.determinant != L2.determinant:
        return None
    G1, U1, U1_inv, _ = L1._reduced
    G2, U2, U2_inv, _ = L2._reduced
    n = L1.rank
    bound = max(G1[i][i] for i in range(n))
    source = [w for w, _ in _all_vectors(L1, bound)]
    vectors = [w for w, _ in _all_vectors(L2, bound)]
    if len(source) != len(vectors):
        return None
    source_prints = dict(zip(map(tuple, source), _fingerprints(G1, source)))
    prints = _fingerprints(G2, vectors)
    if sorted(source_prints.values()) != sorted(prints):
        return None
    basis_prints = [source_prints[tuple(e)] for e in identity(n)]
    candidates = _candidates(G1, basis_prints, G2, vectors, prints)
    h = _extend(G1, G2, candidates, [])
    if h is None:
        return None
    return to_int_matrix(mat_mul(mat_mul(U1_inv, h), U2))
