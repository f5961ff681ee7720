from math import isqrt, prod

import numpy as np
import pytest
import sympy

from hyplat.cli import random_hyperbolic, run_pipeline
from hyplat.cone import make_frame
from hyplat.errors import NotFillableError, OrbitBudgetError
from hyplat.exact_linalg import det, elementary_divisors, mat_mul, transpose
from hyplat.models import decode_matrix
from hyplat.voronoi import GeneratorSet, traverse, verify
from hyplat.watson import (
    LatticeInSpace, fillable_primes, groups_agree, p_filling, recover_aut, watson, watson_chain_lattices,
)

A = [[-1, -3, -1], [-3, 14, 8], [-1, 8, 11]]
A4 = [[17, -17, 20, -9], [-17, -25, 15, -6], [20, 15, 4, -2], [-9, -6, -2, 1]]
# a reduced Gram matrix of the Watson lattice of A4, for comparison only
A4_WATSON_REDUCED = [[-8, -1, -2, -19], [-1, 10, -15, -4], [-2, -15, 21, -2], [-19, -4, -2, -25]]
H3_4 = [[-1, 0, 0], [0, 1, 0], [0, 0, 4]]


def squarefree_exponent(G):
    return all(e < 2 for d in elementary_divisors(G) if d > 1 for e in sympy.factorint(d).values())


def test_lattice_in_space_gram():
    L = LatticeInSpace.standard(A)
    assert L.gram == A
    assert L.determinant == -155
    assert L.is_integral


def test_diag_1_4_fills_to_unimodular():
    L = LatticeInSpace.standard([[1, 0], [0, 4]])
    assert fillable_primes(L) == [2]
    M = p_filling(L, 2)
    assert M.is_integral
    assert abs(M.determinant) == 1


def test_squarefree_discriminant_is_not_fillable():
    L = LatticeInSpace.standard([[1, 0], [0, 2]])
    assert fillable_primes(L) == []
    with pytest.raises(NotFillableError):
        p_filling(L, 2)
    with pytest.raises(NotFillableError):
        p_filling(L, 3)


def test_watson_leaves_squarefree_lattice_alone():
    L = LatticeInSpace.standard(A)
    W, chain = watson(L)
    assert chain == []
    assert W.key() == L.key()


def test_watson_of_unimodular_lattice():
    W, chain = watson(LatticeInSpace.standard([[-1, 0], [0, 1]]))
    assert chain == []


def top_valuation(G, p):
    return max(sympy.multiplicity(p, d) for d in elementary_divisors(G))


def test_four_dimensional_example_fills_once_at_two():
    L = LatticeInSpace.standard(A4)
    assert L.determinant == -32
    assert fillable_primes(L) == [2]
    W, chain = watson(L)
    assert chain == [2]
    assert W.is_integral
    assert W.determinant == -8
    assert elementary_divisors(W.integral_gram()) == [1, 1, 1, 8]
    assert elementary_divisors(A4_WATSON_REDUCED) == [1, 1, 1, 8]


def test_exhaustive_watson_reaches_squarefree_exponent():
    L = LatticeInSpace.standard(A4)
    lattices, chain = watson_chain_lattices(L, exhaustive=True)
    assert chain == [2, 2]
    assert [M.determinant for M in lattices] == [-32, -8, -2]
    assert squarefree_exponent(lattices[-1].integral_gram())


def test_watson_fills_each_prime_once():
    # Z/4 at 2 and Z/27 at 3
    L = LatticeInSpace.standard([[-1, 0, 0], [0, 4, 0], [0, 0, 27]])
    assert fillable_primes(L) == [2, 3]
    W, chain = watson(L)
    assert chain == [2, 3]
    assert abs(W.determinant) == 3
    assert fillable_primes(W) == []


def test_random_watson_invariants():
    rng = np.random.default_rng(5)
    for _ in range(60):
        dim = int(rng.integers(3, 5))
        L = LatticeInSpace.standard(random_hyperbolic(rng, dim, 8))
        G = L.integral_gram()
        W, chain = watson(L)
        assert W.is_integral
        assert chain == fillable_primes(L)
        ratio = abs(L.determinant) // abs(W.determinant)
        assert abs(L.determinant) % abs(W.determinant) == 0
        assert ratio == prod(p * p for p in chain)
        for p in chain:
            assert top_valuation(W.integral_gram(), p) == top_valuation(G, p) - 2
        # signature survives the fillings
        make_frame(W.integral_gram())

        exhaustive, _ = watson(L, exhaustive=True)
        assert squarefree_exponent(exhaustive.integral_gram())
        ratio = abs(L.determinant) // abs(exhaustive.determinant)
        assert isqrt(ratio) ** 2 == ratio
        assert set(sympy.factorint(ratio)) <= set(chain)


def test_recover_aut_without_filling_returns_input():
    f = make_frame(A)
    gens = GeneratorSet(generators=[[[1, 0, 0], [6, -1, 0], [2, 0, -1]]], includes_minus_identity=False)
    recovered = recover_aut(f, LatticeInSpace.standard(A), gens)
    assert recovered.generators == gens.generators
    assert recovered.index == 1


@pytest.fixture(scope="module")
def h3_4_runs():
    f = make_frame(H3_4)
    _, direct = traverse(f)
    L = LatticeInSpace.standard(H3_4)
    W, chain = watson(L)
    _, via_w = traverse(make_frame(W.integral_gram()))
    recovered = recover_aut(f, L, via_w, watson_lattice=W)
    return f, direct, recovered, W, chain


def test_recovered_generators_preserve_the_lattice(h3_4_runs):
    f, _, recovered, W, chain = h3_4_runs
    assert chain == [2]
    assert W.determinant == -1
    assert recovered.index > 1
    for g in recovered.generators:
        assert all(isinstance(a, int) for row in g for a in row)
        assert mat_mul(mat_mul(g, H3_4), transpose(g)) == H3_4


def test_direct_and_recovered_groups_agree(h3_4_runs):
    f, direct, recovered, _, _ = h3_4_runs
    assert groups_agree(f, direct, recovered)


def test_groups_agree_detects_a_smaller_group(h3_4_runs):
    f, direct, _, _, _ = h3_4_runs
    minus = GeneratorSet(generators=[[[-1 if i == j else 0 for j in range(3)] for i in range(3)]])
    assert not groups_agree(f, direct, minus)


def test_groups_agree_rejects_non_automorphisms():
    f = make_frame(H3_4)
    bad = GeneratorSet(generators=[[[1, 1, 0], [0, 1, 0], [0, 0, 1]]])
    assert not groups_agree(f, bad, bad)


def test_recover_aut_budget(h3_4_runs):
    f, _, _, W, _ = h3_4_runs
    _, via_w = traverse(make_frame(W.integral_gram()))
    with pytest.raises(OrbitBudgetError):
        recover_aut(f, LatticeInSpace.standard(H3_4), via_w, watson_lattice=W, budget=1)


def class_signature(f, graph):
    return sorted((p.norm, p.minimum, len(p.minvecs), p.num_directions, p.num_non_blind(f), s.order)
                  for p, s in zip(graph.points, graph.stabilizers))


@pytest.fixture(scope="module")
def a4_pipeline():
    report, graph = run_pipeline(A4, "auto")
    return report, graph


@pytest.mark.slow
def test_four_dimensional_example_through_the_pipeline(a4_pipeline):
    report, _ = a4_pipeline
    assert report.mode == "watson"
    assert report.watson.chain == [2]
    assert report.watson.determinants == ["-32", "-8"]
    assert len(report.classes) == 3
    L = LatticeInSpace.standard(A4)
    for encoded in report.generators:
        g = decode_matrix(encoded)
        assert mat_mul(mat_mul(g, A4), transpose(g)) == A4
        # integral and unimodular, so g maps the lattice onto itself
        assert abs(sympy.Matrix(g).det()) == 1
        assert LatticeInSpace(basis=mat_mul(g, L.basis), form=A4).key() == L.key()


@pytest.mark.slow
def test_watson_lattice_matches_the_reduced_gram(a4_pipeline):
    report, graph = a4_pipeline
    W = decode_matrix(report.traversed)
    f = make_frame(W)
    reference = make_frame(A4_WATSON_REDUCED)
    other, _ = traverse(reference)
    assert det(W) == det(A4_WATSON_REDUCED) == -8
    assert class_signature(f, graph) == class_signature(reference, other)


@pytest.mark.slow
def test_four_dimensional_example_direct_has_nineteen_classes_and_same_group(a4_pipeline):
    f = make_frame(A4)
    graph, direct = traverse(f)
    assert len(graph.points) == 19
    assert verify(f, graph, direct).ok
    report, _ = a4_pipeline
    recovered = GeneratorSet(generators=[decode_matrix(g) for g in report.generators])
    assert groups_agree(f, direct, recovered)


def random_fillable(rng, count):
    found = []
    for _ in range(5000):
        A = random_hyperbolic(rng, 3, 6)
        L = LatticeInSpace.standard(A)
        if abs(L.determinant) <= 64 and fillable_primes(L):
            found.append(A)
            if len(found) == count:
                break
    return found


@pytest.mark.slow
@pytest.mark.parametrize("A", random_fillable(np.random.default_rng(11), 6))
def test_random_direct_and_recovered_groups_agree(A):
    f = make_frame(A)
    _, direct = traverse(f)
    report, _ = run_pipeline(A, "watson")
    assert report.watson.applied
    recovered = GeneratorSet(generators=[decode_matrix(g) for g in report.generators])
    assert groups_agree(f, direct, recovered)
