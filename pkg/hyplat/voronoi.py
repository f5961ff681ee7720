"""Perfect points, neighbours, stabilizers and the residue graph traversal."""
import logging
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from hyplat import config
from hyplat.cone import (
    ConeFrame, Membership, MinimalVectorData, enclosed_d_vectors, in_V1, minimal_vectors,
)
from hyplat.errors import BlindDirectionError, InternalError
from hyplat.exact_linalg import (
    IntMatrix, Matrix, block_diagonal, canonical_lattice_key, det, dot, identity, int_inverse,
    inverse, is_integral, kernel_saturated, mat_mul, matrix_key, orthogonal_complement,
    primitive, rank, to_int_matrix, transpose, vec_mat,
)
from hyplat.models import VerificationReport
from hyplat.orbits import orbit, orbit_stabilizer
from hyplat.pdlat import FiniteMatrixGroup, PDLattice, automorphism_group, isometry
from hyplat.polycone import RayList, extreme_rays, is_blind
from hyplat.profiling import profile_time

logger = logging.getLogger(__name__)

UnimodularMap = IntMatrix


@dataclass
class PerfectPoint:
    vector: List[int]
    data: MinimalVectorData
    rays: RayList
    id: int = 0
    _cache: Dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def from_vector(cls, f: ConeFrame, x: Sequence[int], id: int = 0) -> "PerfectPoint":
        return _perfect_point(f, minimal_vectors(f, x), id)

    @property
    def norm(self) -> int:
        return self.data.norm

    @property
    def minimum(self):
        return self.data.minimum

    @property
    def minvecs(self) -> List[List[int]]:
        return self.data.minvecs

    @property
    def num_directions(self) -> int:
        return len(self.rays)

    def num_non_blind(self, f: ConeFrame) -> int:
        return len(self.rays.non_blind(f))


@dataclass
class ResidueEdge:
    source: int
    target: int
    # None on a spanning-tree edge, else the connecting element c (possibly the
    # identity) with x_source ~ x_target·c^-1
    element: Optional[UnimodularMap] = None
    ray: Optional[int] = None


@dataclass
class ResidueGraph:
    points: List[PerfectPoint]
    edges: List[ResidueEdge]
    stabilizers: List[FiniteMatrixGroup]

    @property
    def connecting_elements(self) -> List[ResidueEdge]:
        return [e for e in self.edges if e.element is not None]

    @property
    def tree_edges(self) -> List[ResidueEdge]:
        return [e for e in self.edges if e.element is None]


@dataclass
class GeneratorSet:
    generators: List[UnimodularMap]
    includes_minus_identity: bool = True
    # index in the group the set was recovered from, when it was
    index: Optional[int] = None


# --- Perfect points ---

def _perfect_point(f: ConeFrame, data: MinimalVectorData, id: int = 0) -> PerfectPoint:
    if data.rank_of_span != f.n:
        raise InternalError(f"{data.point} is not perfect: minimal vectors span rank {data.rank_of_span}")
    return PerfectPoint(vector=data.point, data=data, rays=extreme_rays(data.minvecs, f.n), id=id)


def _rescaled(f: ConeFrame, y: Sequence[Fraction], minimum, minvecs) -> MinimalVectorData:
    z, c = primitive(y)
    m = minimum * c
    if Fraction(m).denominator != 1:
        raise InternalError(f"rescaled minimum {m} is not integral")
    return MinimalVectorData.from_vectors(f, z, int(m), minvecs)


def advance_along(f: ConeFrame, x: Sequence[int], minimum, r: Sequence[int]):
    """Walk from x along r to the first point where a vector d with r·d < 0 reaches the minimum.

    Returns that point (rational) and its minimal vectors. The search steps a
    trial point x + rho·r, bisecting back whenever it leaves V1 and doubling
    while no such d is found; once one is found the exact rho follows from the
    candidates, since every d with a smaller crossing value is among them.
    """
    lo, hi = Fraction(0), None
    rho = Fraction(1)
    for step in range(config.RAY_STEP_LIMIT):
        y = [a + rho * b for a, b in zip(x, r)]
        if in_V1(f, y) != Membership.INTERIOR:
            hi = rho
            rho = (lo + rho) / 2
            continue
        crossing = [d for d, _ in enclosed_d_vectors(f, y, minimum) if dot(r, d) < 0]
        if not crossing:
            lo = rho
            rho = rho * 2 if hi is None else (rho + hi) / 2
            continue
        rho = min(Fraction(dot(x, d) - minimum, -dot(r, d)) for d in crossing)
        if rho <= 0:
            raise InternalError(f"non-positive step {rho} along {list(r)}")
        y = [a + rho * b for a, b in zip(x, r)]
        found = enclosed_d_vectors(f, y, minimum)
        if any(p != minimum for _, p in found):
            raise InternalError(f"vector below the minimum at {y}")
        logger.debug(f"ray step from {list(x)} along {list(r)}: rho = {rho} after {step + 1} trials")
        return y, [d for d, _ in found]
    raise InternalError(f"no wall found along {list(r)} within {config.RAY_STEP_LIMIT} trial points")


def initial_perfect_point(f: ConeFrame) -> PerfectPoint:
    x = f.anchor1
    data = minimal_vectors(f, x)
    while data.rank_of_span < f.n:
        before = data.rank_of_span
        r = kernel_saturated(transpose(data.minvecs))[0]
        if is_blind(f, r):
            r = [-a for a in r]
        y, minvecs = advance_along(f, data.point, data.minimum, r)
        data = _rescaled(f, y, data.minimum, minvecs)
        if data.rank_of_span <= before:
            raise InternalError(f"rank of minimal vectors did not grow past {before}")
    logger.info(f"initial perfect point {data.point}, N = {data.norm}, {len(data.minvecs)} minimal vectors")
    return _perfect_point(f, data)


def neighbour(f: ConeFrame, p: PerfectPoint, ray_index: int) -> PerfectPoint:
    r = p.rays.rays[ray_index]
    if is_blind(f, r):
        raise BlindDirectionError(f"direction {r} of {p.vector} is blind")
    y, minvecs = advance_along(f, p.vector, p.minimum, r)
    return _perfect_point(f, _rescaled(f, y, p.minimum, minvecs))


# --- Complement lattices L(x) ---

@dataclass
class _Complement:
    basis: Matrix            # L(x) rows, then x
    basis_inverse: Matrix
    lattice: PDLattice       # L(x) with the form induced by A
    glue: Matrix             # Z^n in the coordinates of `basis`
    aut: FiniteMatrixGroup


def _complement(f: ConeFrame, p: PerfectPoint) -> _Complement:
    if "complement" not in p._cache:
        A = f.lattice.A
        kernel = orthogonal_complement(vec_mat(p.vector, A))
        lattice = PDLattice([[f.lattice.form(a, b) for b in kernel] for a in kernel])
        basis = kernel + [list(p.vector)]
        basis_inverse = inverse(basis)
        p._cache["complement"] = _Complement(basis=basis, basis_inverse=basis_inverse, lattice=lattice,
                                             glue=basis_inverse, aut=automorphism_group(lattice))
    return p._cache["complement"]


def _glue_action(lat, g):
    return mat_mul(lat, block_diagonal(g))


def _pair_invariant(f: ConeFrame, p: PerfectPoint) -> Tuple:
    if "pairs" not in p._cache:
        adj = f.lattice.adjA
        images = [vec_mat(d, adj) for d in p.minvecs]
        p._cache["pairs"] = tuple(sorted(dot(images[i], p.minvecs[j])
                                         for i in range(len(images)) for j in range(i, len(images))))
    return p._cache["pairs"]


def stabilizer(f: ConeFrame, p: PerfectPoint, budget: Optional[int] = None) -> FiniteMatrixGroup:
    """Stab(x): the automorphisms of L(x) whose extension by x -> x is integral."""
    if "stabilizer" in p._cache:
        return p._cache["stabilizer"]
    comp = _complement(f, p)
    found = orbit_stabilizer(comp.glue, comp.aut.generators, _glue_action, canonical_lattice_key,
                             mat_mul, int_inverse, identity(f.n - 1), matrix_key, budget=budget)
    gens = [to_int_matrix(mat_mul(mat_mul(comp.basis_inverse, block_diagonal(s)), comp.basis))
            for s in found.stabilizer]
    order = comp.aut.order // len(found) if comp.aut.order else None
    group = FiniteMatrixGroup(gens, f.lattice.A, order)
    logger.debug(f"stabilizer of {p.vector}: order {order}, glue orbit {len(found)}")
    p._cache["stabilizer"] = group
    return group


def equivalent(f: ConeFrame, p: PerfectPoint, q: PerfectPoint,
               budget: Optional[int] = None) -> Optional[UnimodularMap]:
    """Some omega in the reduced automorphism group with p·omega = q, or None."""
    if list(p.vector) == list(q.vector):
        return identity(f.n)
    if (p.norm, p.minimum, len(p.minvecs)) != (q.norm, q.minimum, len(q.minvecs)):
        return None
    if _pair_invariant(f, p) != _pair_invariant(f, q):
        return None
    cp, cq = _complement(f, p), _complement(f, q)
    g0 = isometry(cp.lattice, cq.lattice)
    if g0 is None:
        return None
    target = canonical_lattice_key(cq.glue)
    found = orbit(_glue_action(cp.glue, g0), cq.aut.generators, _glue_action, canonical_lattice_key,
                  mat_mul, identity(f.n - 1), budget=budget, target=target)
    k = found.index.get(target)
    if k is None:
        return None
    h = mat_mul(g0, found.transversal[k])
    omega = mat_mul(mat_mul(cp.basis_inverse, block_diagonal(h)), cq.basis)
    if not is_integral(omega) or vec_mat(p.vector, omega) != list(q.vector):
        raise InternalError(f"extension of an isometry {p.vector} -> {q.vector} failed")
    return to_int_matrix(omega)


# --- Traversal ---

def _ray_orbit_representatives(f: ConeFrame, p: PerfectPoint, stab: FiniteMatrixGroup) -> List[int]:
    index = {tuple(r): i for i, r in enumerate(p.rays.rays)}
    seen = set()
    representatives = []
    for i in p.rays.non_blind(f):
        if i in seen:
            continue
        representatives.append(i)
        found = orbit(tuple(p.rays.rays[i]), stab.generators, lambda r, g: tuple(vec_mat(r, g)),
                      lambda r: r, lambda a, b: None, None, budget=len(index))
        for r in found.points:
            if r not in index:
                raise InternalError(f"stabilizer maps a direction of {p.vector} outside the direction set")
            seen.add(index[r])
    return representatives


def _find_class(f: ConeFrame, y: PerfectPoint, points: Sequence[PerfectPoint], budget: Optional[int] = None):
    for k, z in enumerate(points):
        omega = equivalent(f, y, z, budget)
        if omega is not None:
            return k, omega
    return None


def _point_orbit(v, stab: FiniteMatrixGroup):
    found = orbit(tuple(v), stab.generators, lambda p, g: tuple(vec_mat(p, g)), lambda p: p,
                  lambda a, b: None, None, budget=10**6)
    return set(found.points)


def _dedupe(matrices):
    seen = set()
    out = []
    for g in matrices:
        key = matrix_key(g)
        if key not in seen:
            seen.add(key)
            out.append(g)
    return out


@profile_time
def traverse(f: ConeFrame, budget: Optional[int] = None) -> Tuple[ResidueGraph, GeneratorSet]:
    """Walk the residue graph from the initial perfect point.

    Every direction orbit of every class ends in exactly one edge. The
    direction that discovered a class and the way back to it from the new
    class form one tree edge; every other direction orbit records its
    connecting element, the identity included, whether the class it meets
    is still open or already closed.
    """
    n = f.n
    one = identity(n)
    points = [initial_perfect_point(f)]
    parents: Dict[int, int] = {}
    stabilizers: Dict[int, FiniteMatrixGroup] = {}
    pending = deque([0])
    edges: List[ResidueEdge] = []
    collected: List[IntMatrix] = []

    while pending:
        i = pending.popleft()
        x = points[i]
        stab = stabilizer(f, x, budget)
        stabilizers[i] = stab
        collected.extend(stab.generators)
        representatives = _ray_orbit_representatives(f, x, stab)
        logger.info(f"class {i} {x.vector}: {x.num_non_blind(f)} non-blind directions, "
                    f"{len(representatives)} up to Stab (order {stab.order})")
        parent = parents.get(i)
        for j in representatives:
            y = neighbour(f, x, j)
            if parent is not None and tuple(points[parent].vector) in _point_orbit(y.vector, stab):
                parent = None
                continue
            match = _find_class(f, y, points, budget)
            if match is None:
                y.id = len(points)
                points.append(y)
                parents[y.id] = i
                pending.append(y.id)
                edges.append(ResidueEdge(i, y.id, None, j))
                logger.info(f"new class {y.id}: {y.vector}")
                continue
            k, omega = match
            edges.append(ResidueEdge(i, k, omega, j))
            collected.append(omega)
        if parent is not None:
            raise InternalError(f"class {i} has no direction back to class {parent}")

    minus = [[-a for a in row] for row in one]
    generators = [g for g in _dedupe(collected) if g != one and g != minus] + [minus]
    graph = ResidueGraph(points=points, edges=edges, stabilizers=[stabilizers[i] for i in range(len(points))])
    logger.info(f"traversal finished: {len(points)} classes, {len(graph.connecting_elements)} connecting "
                f"elements, {len(generators)} generators")
    return graph, GeneratorSet(generators=generators, includes_minus_identity=True)


# --- Verification ---

def _check_map(report: VerificationReport, g, A, label: str) -> None:
    if not is_integral(g):
        report.add("not integral", label)
    elif abs(det(g)) != 1:
        report.add("not unimodular", label)
    if mat_mul(mat_mul(g, A), transpose(g)) != A:
        report.add("form not preserved", label)


def check_generators(f: ConeFrame, gens: GeneratorSet,
                     report: Optional[VerificationReport] = None) -> VerificationReport:
    report = report if report is not None else VerificationReport()
    for idx, h in enumerate(gens.generators):
        _check_map(report, h, f.lattice.A, f"generator {idx}")
    return report


def _edge_ends(graph: ResidueGraph, i: int) -> List[Tuple[int, ...]]:
    """Neighbours of x_i that the recorded edges account for."""
    ends = []
    for e in graph.edges:
        c = e.element
        if e.source == i:
            target = graph.points[e.target].vector
            ends.append(tuple(vec_mat(target, int_inverse(c)) if c is not None else target))
        if e.target == i:
            source = graph.points[e.source].vector
            ends.append(tuple(vec_mat(source, c) if c is not None else source))
    return ends


@profile_time("verify")
def verify(f: ConeFrame, g: ResidueGraph, gens: GeneratorSet) -> VerificationReport:
    """Re-check a traversal, including the closure certificate over all non-blind directions."""
    report = VerificationReport()
    A = f.lattice.A
    n = f.n

    check_generators(f, gens, report)

    for p in g.points:
        data = minimal_vectors(f, p.vector)
        if data.rank_of_span != n or data.minvecs != p.minvecs:
            report.add("not perfect", f"class {p.id} {p.vector}")

    for i, stab in enumerate(g.stabilizers):
        x = g.points[i].vector
        for s in stab.generators:
            if vec_mat(x, s) != list(x):
                report.add("stabilizer moves point", f"class {i}")
            if mat_mul(mat_mul(s, A), transpose(s)) != A:
                report.add("stabilizer breaks form", f"class {i}")

    for idx, e in enumerate(g.edges):
        target = g.points[e.target].vector
        if e.element is not None:
            _check_map(report, e.element, A, f"edge {idx}")
            if not is_integral(e.element) or abs(det(e.element)) != 1:
                continue
            target = vec_mat(target, int_inverse(e.element))
        if in_V1(f, target) != Membership.INTERIOR:
            report.add("edge not contiguous", f"edge {idx} leaves V1")
            continue
        other = minimal_vectors(f, target).minvecs
        common = sorted(set(map(tuple, g.points[e.source].minvecs)) & set(map(tuple, other)))
        if not common or rank(common) != n - 1:
            report.add("edge not contiguous", f"edge {idx} ({e.source} -> {e.target})")

    for i, p in enumerate(g.points):
        ends = set(_edge_ends(g, i))
        for j in p.rays.non_blind(f):
            y = neighbour(f, p, j)
            if not _point_orbit(y.vector, g.stabilizers[i]) & ends:
                report.add("direction not covered", f"class {i} direction {p.rays.rays[j]}")

    if report.violations:
        logger.warning(f"verification found {len(report.violations)} violations")
    else:
        logger.info("verification passed")
    return report
