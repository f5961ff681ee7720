"""p-fillings, the Watson lattice and recovery of Aut(L) from Aut(Watson(L)).

All lattices live in the ambient rational space of the input Gram matrix,
so Aut(L) is literally a subgroup of Aut(W) once both are written in the
coordinates of one basis.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import List, Optional, Sequence, Tuple

from sympy import factorint, multiplicity

from hyplat.cone import ConeFrame
from hyplat.errors import InternalError, NotFillableError, PreconditionError
from hyplat.exact_linalg import (
    IntMatrix, Matrix, canonical_lattice_key, det, identity, int_inverse, inverse, is_integral,
    lattice_basis, mat_mul, matrix_key, snf, to_fraction_matrix, to_int_matrix, transpose, vec_mat,
)
from hyplat.orbits import orbit, orbit_stabilizer
from hyplat.profiling import profile_time
from hyplat.voronoi import GeneratorSet

logger = logging.getLogger(__name__)

# finite quotients larger than this are skipped by groups_agree
QUOTIENT_CAP = 20000


@dataclass
class LatticeInSpace:
    basis: Matrix      # rational rows in ambient coordinates
    form: IntMatrix    # ambient Gram matrix

    @classmethod
    def standard(cls, A: Sequence[Sequence[int]]) -> "LatticeInSpace":
        A = [[int(a) for a in row] for row in A]
        return cls(basis=identity(len(A)), form=A)

    @property
    def rank(self) -> int:
        return len(self.basis)

    @cached_property
    def gram(self) -> List[List[Fraction]]:
        B = to_fraction_matrix(self.basis)
        return mat_mul(mat_mul(B, self.form), transpose(B))

    @property
    def is_integral(self) -> bool:
        return is_integral(self.gram)

    def integral_gram(self) -> IntMatrix:
        if not self.is_integral:
            raise PreconditionError("lattice is not integral")
        return to_int_matrix(self.gram)

    @property
    def determinant(self) -> int:
        return int(det(self.integral_gram()))

    def key(self) -> Tuple:
        return canonical_lattice_key(self.basis)


def _valuations(divisors: Sequence[int], p: int) -> List[int]:
    return [multiplicity(p, d) if d else 0 for d in divisors]


def fillable_primes(L: LatticeInSpace) -> List[int]:
    """Primes p for which the discriminant group has an element of order p^2, ascending."""
    S, _, _ = snf(L.integral_gram())
    primes = set()
    for i in range(L.rank):
        d = S[i][i]
        if d > 1:
            primes.update(p for p, e in factorint(d).items() if e >= 2)
    return sorted(primes)


def p_filling(L: LatticeInSpace, p: int) -> LatticeInSpace:
    """Glue the order-p part of p^(k-1)·Δ onto L, k the top p-valuation; the form is unchanged."""
    G = L.integral_gram()
    S, U, _ = snf(G)
    divisors = [S[i][i] for i in range(L.rank)]
    valuations = _valuations(divisors, p)
    top = max(valuations)
    if top < 2:
        raise NotFillableError(f"discriminant group has no element of order {p}^2")
    glue = [U[i] for i, v in enumerate(valuations) if v == top]
    scaled = lattice_basis([[p if i == j else 0 for j in range(L.rank)] for i in range(L.rank)] + glue)
    coords = [[Fraction(a, p) for a in row] for row in scaled]
    filled = LatticeInSpace(basis=mat_mul(coords, L.basis), form=L.form)
    if not filled.is_integral:
        raise InternalError(f"{p}-filling produced a non-integral lattice")
    logger.debug(f"{p}-filling glued {len(glue)} vectors, |det| {abs(L.determinant)} -> {abs(filled.determinant)}")
    return filled


def watson_chain_lattices(L: LatticeInSpace, exhaustive: bool = False) -> Tuple[List[LatticeInSpace], List[int]]:
    """Every lattice of the filling chain, starting with L, and the primes used.

    Each prime that is fillable for L is filled once, in ascending order.
    With `exhaustive` the pass repeats until no filling applies, which
    leaves a discriminant group of squarefree exponent.
    """
    lattices = [L]
    chain = []
    primes = fillable_primes(L)
    while primes:
        for p in primes:
            if p in fillable_primes(lattices[-1]):
                lattices.append(p_filling(lattices[-1], p))
                chain.append(p)
        primes = fillable_primes(lattices[-1]) if exhaustive else []
    return lattices, chain


@profile_time
def watson(L: LatticeInSpace, exhaustive: bool = False) -> Tuple[LatticeInSpace, List[int]]:
    lattices, chain = watson_chain_lattices(L, exhaustive)
    W = lattices[-1]
    if chain:
        logger.info(f"Watson chain {chain}: det {L.determinant} -> {W.determinant}")
    return W, chain


def recover_aut(f: ConeFrame, L: LatticeInSpace, gens_W: GeneratorSet,
                watson_lattice: Optional[LatticeInSpace] = None,
                budget: Optional[int] = None) -> GeneratorSet:
    """Aut(L) as the stabilizer of L inside Aut(W).

    `gens_W` act on the coordinates of W's basis; the result acts on the
    coordinates of L's basis, which is the frame's Gram matrix for the
    usual standard L.
    """
    if L.form != f.lattice.A:
        raise PreconditionError("L does not live in the frame's ambient space")
    W = watson_lattice if watson_lattice is not None else watson(L)[0]
    if W.key() == L.key():
        return GeneratorSet(generators=list(gens_W.generators),
                            includes_minus_identity=gens_W.includes_minus_identity, index=1)

    n = L.rank
    coords = mat_mul(to_fraction_matrix(L.basis), inverse(W.basis))
    if not is_integral(coords):
        raise PreconditionError("L is not contained in the Watson lattice")
    coords = to_int_matrix(coords)
    coords_inverse = inverse(coords)

    found = orbit_stabilizer(coords, gens_W.generators, mat_mul, canonical_lattice_key, mat_mul,
                             int_inverse, identity(n), matrix_key, budget=budget)

    one = identity(n)
    minus = [[-a for a in row] for row in one]
    seen = {matrix_key(one), matrix_key(minus)}
    generators = []
    A = L.integral_gram()
    for s in found.stabilizer:
        gamma = mat_mul(mat_mul(coords, s), coords_inverse)
        if not is_integral(gamma):
            raise InternalError("stabilizer element does not preserve L")
        gamma = to_int_matrix(gamma)
        if mat_mul(mat_mul(gamma, A), transpose(gamma)) != A:
            raise InternalError("recovered element does not preserve the form")
        k = matrix_key(gamma)
        if k not in seen:
            seen.add(k)
            generators.append(gamma)
    generators.append(minus)
    logger.info(f"recovered Aut(L) from an orbit of {len(found)} lattices, {len(generators)} generators")
    return GeneratorSet(generators=generators, includes_minus_identity=True, index=len(found))


# --- Comparing generating sets ---

def _partition(points, generators, act) -> frozenset:
    remaining = set(points)
    blocks = []
    while remaining:
        start = next(iter(remaining))
        found = orbit(start, generators, act, lambda p: p, lambda a, b: None, None,
                      budget=len(points))
        block = frozenset(found.points)
        remaining -= block
        blocks.append(block)
    return frozenset(blocks)


def _discriminant_points(f: ConeFrame) -> List[Tuple[int, ...]]:
    """Z^n·adj(A) modulo |det A|, i.e. the discriminant group scaled by |det A|."""
    m = abs(f.lattice.detA)
    rows = [tuple(a % m for a in row) for row in f.lattice.adjA]
    zero = tuple(0 for _ in range(f.n))
    found = orbit(zero, rows, lambda p, r: tuple((a + b) % m for a, b in zip(p, r)), lambda p: p,
                  lambda a, b: None, None, budget=QUOTIENT_CAP)
    return found.points


def groups_agree(f: ConeFrame, gens_a: GeneratorSet, gens_b: GeneratorSet) -> bool:
    """Necessary conditions for two generating sets to generate the same subgroup of Aut(A)."""
    A = f.lattice.A
    n = f.n
    for g in list(gens_a.generators) + list(gens_b.generators):
        if not is_integral(g) or abs(det(g)) != 1 or mat_mul(mat_mul(g, A), transpose(g)) != A:
            logger.info("groups differ: a generator is not an integral automorphism of the form")
            return False

    for m in (2, 3):
        if m ** n > QUOTIENT_CAP:
            continue
        points = list(product(range(m), repeat=n))

        def act(p, g, m=m):
            return tuple(a % m for a in vec_mat(p, g))

        if _partition(points, gens_a.generators, act) != _partition(points, gens_b.generators, act):
            logger.info(f"groups differ on (Z/{m})^{n}")
            return False

    m = abs(f.lattice.detA)
    if 1 < m <= QUOTIENT_CAP:
        points = _discriminant_points(f)

        def act(p, g):
            return tuple(a % m for a in vec_mat(p, g))

        if _partition(points, gens_a.generators, act) != _partition(points, gens_b.generators, act):
            logger.info("groups differ on the discriminant group")
            return False
    return True
