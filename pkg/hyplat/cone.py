"""Hyperbolic dual cones, the admissible set D and D-minimal vectors.

V1 is the component of {x : x·A·x^tr < 0} containing the frame anchor,
V2 = -V1·A is its dual cone under the standard pairing, and D is the set
of nonzero integral vectors in the closure of V2.
"""
import enum
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

from hyplat.errors import AsymmetricMatrixError, InternalError, PreconditionError, SignatureError, SingularError
from hyplat.exact_linalg import (
    IntMatrix, Number, adjugate, bilinear, column, det, dot, hnf, identity, is_symmetric, is_zero,
    lll_reduce, primitive, rank, rational_diagonalize, solve_left, vec_mat,
)
from hyplat.pdlat import PDLattice, close_vectors, short_vectors

logger = logging.getLogger(__name__)


class Membership(str, enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


@dataclass
class GramLattice:
    A: IntMatrix
    n: int
    adjA: IntMatrix
    detA: int

    @classmethod
    def from_matrix(cls, A: Sequence[Sequence[int]]) -> "GramLattice":
        A = [[int(a) for a in row] for row in A]
        n = len(A)
        if n == 0 or not is_symmetric(A):
            raise AsymmetricMatrixError("Gram matrix must be square and symmetric")
        d = det(A)
        if d == 0:
            raise SingularError("Gram matrix is singular")
        if n < 2:
            raise SignatureError("a hyperbolic lattice needs rank at least 2")
        _, diagonal = rational_diagonalize(A)
        negative = sum(1 for a in diagonal if a < 0)
        if negative != 1:
            raise SignatureError(f"signature is ({n - negative},-{negative}), expected ({n - 1},-1)")
        return cls(A=A, n=n, adjA=adjugate(A), detA=d)

    def form(self, u: Sequence[Number], v: Sequence[Number]) -> Number:
        return bilinear(u, self.A, v)

    def inverse_form(self, d: Sequence[Number], e: Sequence[Number]) -> Fraction:
        """d·A^-1·e^tr."""
        return Fraction(bilinear(d, self.adjA, e)) / self.detA

    def norm(self, x: Sequence[Number]) -> Number:
        """N(x) = -x·A·x^tr."""
        return -bilinear(x, self.A, x)


@dataclass
class ConeFrame:
    lattice: GramLattice
    anchor1: List[int]
    anchor2: List[int]

    @property
    def n(self) -> int:
        return self.lattice.n


@dataclass
class MinimalVectorData:
    point: List[int]
    norm: int
    minimum: Number
    minvecs: List[List[int]]
    rank_of_span: int

    @classmethod
    def from_vectors(cls, frame: ConeFrame, point: Sequence[int], minimum: Number,
                     minvecs: Sequence[Sequence[int]]) -> "MinimalVectorData":
        minvecs = sorted(list(d) for d in minvecs)
        return cls(point=list(point), norm=frame.lattice.norm(point), minimum=minimum,
                   minvecs=minvecs, rank_of_span=rank(minvecs) if minvecs else 0)


def _anchor(lattice: GramLattice) -> List[int]:
    for i in range(lattice.n):
        if lattice.A[i][i] < 0:
            return identity(lattice.n)[i]
    T, diagonal = rational_diagonalize(lattice.A)
    j = next(i for i, a in enumerate(diagonal) if a < 0)
    anchor, _ = primitive(T[j])
    return _shortened(lattice, anchor)


def _shortened(lattice: GramLattice, x0: List[int]) -> List[int]:
    """A negative vector of small |x·A·x^tr| in the component of x0.

    Candidates are the rows of an LLL basis of the majorant
    A - 2·(x0·A)^tr·(x0·A)/q(x0) and their pairwise sums and differences.
    """
    q0 = lattice.form(x0, x0)
    w = vec_mat(x0, lattice.A)
    n = lattice.n
    majorant = [[lattice.A[i][k] - Fraction(2 * w[i] * w[k], q0) for k in range(n)] for i in range(n)]
    _, U = lll_reduce(majorant)
    candidates = list(U) + [[a + s * b for a, b in zip(U[i], U[k])]
                            for i in range(n) for k in range(i + 1, n) for s in (1, -1)]
    best, best_q = x0, q0
    for v in candidates:
        q = lattice.form(v, v)
        if best_q < q < 0:
            best, best_q = v, q
    if best is not x0:
        best, _ = primitive(best)
        if lattice.form(best, x0) > 0:
            best = [-a for a in best]
        logger.debug(f"anchor shortened from {x0} (norm {-q0}) to {best} (norm {-best_q})")
    return best


def make_frame(A: Sequence[Sequence[int]]) -> ConeFrame:
    lattice = GramLattice.from_matrix(A)
    x0 = _anchor(lattice)
    w0 = [-a for a in vec_mat(x0, lattice.A)]
    logger.info(f"cone frame for rank {lattice.n} lattice, det {lattice.detA}, anchor {x0}")
    return ConeFrame(lattice=lattice, anchor1=x0, anchor2=w0)


def in_V1(f: ConeFrame, x: Sequence[Number]) -> Membership:
    q = f.lattice.form(x, x)
    s = f.lattice.form(x, f.anchor1)
    if q < 0 and s < 0:
        return Membership.INTERIOR
    if q == 0 and (is_zero(x) or s < 0):
        return Membership.BOUNDARY
    return Membership.OUTSIDE


def in_V2(f: ConeFrame, d: Sequence[Number]) -> Membership:
    q = bilinear(d, f.lattice.adjA, d)
    if f.lattice.detA < 0:
        q = -q
    s = dot(d, f.anchor1)
    if q < 0 and s > 0:
        return Membership.INTERIOR
    if q == 0 and (is_zero(d) or s > 0):
        return Membership.BOUNDARY
    return Membership.OUTSIDE


class _PairingSlices:
    """Enumerates {d in D : x·d^tr = k} for one interior point x.

    Writing d = -(k/N)·x·A + y with x·y^tr = 0, the condition d in the
    closure of V2 becomes y·A^-1·y^tr <= k^2/N on the positive definite
    hyperplane x^perp, so each slice is one close-vector search.
    """

    def __init__(self, f: ConeFrame, x: Sequence[int]):
        self.frame = f
        self.x = list(x)
        self.norm = f.lattice.norm(x)
        H, U = hnf(column(x))
        self.step = H[-1][0]
        self.lift = U[-1]
        self.kernel = hnf(U[:-1])[0]
        gram = [[f.lattice.inverse_form(a, b) for b in self.kernel] for a in self.kernel]
        self.complement = PDLattice(gram)
        xA = vec_mat(x, f.lattice.A)
        w1 = [Fraction(u, self.step) + Fraction(a, self.norm) for u, a in zip(self.lift, xA)]
        self.offset = solve_left(self.kernel, w1)

    def slice(self, k: int) -> List[List[int]]:
        if k % self.step:
            return []
        target = [-k * c for c in self.offset]
        bound = Fraction(k * k, self.norm)
        base = [(k // self.step) * u for u in self.lift]
        out = []
        for t, _ in close_vectors(self.complement, target, bound):
            d = [a + b for a, b in zip(base, vec_mat(t, self.kernel))]
            if in_V2(self.frame, d) == Membership.OUTSIDE:
                continue
            if dot(self.x, d) != k:
                raise InternalError(f"pairing {dot(self.x, d)} != {k} for {d}")
            out.append(d)
        out.sort()
        return out


def _require_interior(f: ConeFrame, x: Sequence[Number]) -> None:
    if in_V1(f, x) != Membership.INTERIOR:
        raise PreconditionError(f"{list(x)} is not in the interior of V1")


def minimal_vectors(f: ConeFrame, x: Sequence[int]) -> MinimalVectorData:
    """D-minimum and D-minimal vectors of an integral interior point."""
    _require_interior(f, x)
    slices = _PairingSlices(f, x)
    for k in range(slices.step, slices.norm + 1, slices.step):
        found = slices.slice(k)
        if found:
            return MinimalVectorData.from_vectors(f, x, k, found)
    raise InternalError(f"no vector of D paired with {list(x)} up to N(x) = {slices.norm}")


def d_short_vectors(f: ConeFrame, x: Sequence[int], C: int) -> List[Tuple[List[int], int]]:
    """All d in D with x·d^tr <= C, ordered by pairing value then lexicographically."""
    _require_interior(f, x)
    if C < 1:
        return []
    slices = _PairingSlices(f, x)
    return [(d, k) for k in range(1, C + 1) for d in slices.slice(k)]


def enclosed_d_vectors(f: ConeFrame, y: Sequence[Number], bound) -> List[Tuple[List[int], Fraction]]:
    """All d in D with y·d^tr <= bound for a rational interior point y.

    Every such d satisfies Q_y(d) <= 2·bound^2/N(y) for the positive definite
    majorant Q_y = A^-1 + 2·y^tr·y/N(y), so one enumeration suffices.
    """
    y = [Fraction(a) for a in y]
    bound = Fraction(bound)
    _require_interior(f, y)
    if bound <= 0:
        return []
    lattice = f.lattice
    N = lattice.norm(y)
    n = lattice.n
    majorant = [[Fraction(lattice.adjA[i][j], lattice.detA) + 2 * y[i] * y[j] / N for j in range(n)]
                for i in range(n)]
    out = []
    for v, _ in short_vectors(PDLattice(majorant), 2 * bound * bound / N):
        p = dot(y, v)
        if p < 0:
            v, p = [-a for a in v], -p
        if p == 0 or p > bound:
            continue
        if in_V2(f, v) == Membership.OUTSIDE:
            continue
        out.append((v, p))
    out.sort(key=lambda item: (item[1], item[0]))
    return out
