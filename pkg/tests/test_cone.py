from fractions import Fraction

import numpy as np
import pytest

from hyplat.cli import random_hyperbolic
from hyplat.cone import (
    GramLattice, Membership, d_short_vectors, enclosed_d_vectors, in_V1, in_V2, make_frame, minimal_vectors,
)
from hyplat.errors import AsymmetricMatrixError, PreconditionError, SignatureError, SingularError
from hyplat.exact_linalg import content, vec_mat

A = [[-1, -3, -1], [-3, 14, 8], [-1, 8, 11]]
H2 = [[-1, 0], [0, 1]]
H3 = [[-1, 0, 0], [0, 1, 0], [0, 0, 1]]

KNOWN_PERFECT_POINTS = [
    (1, 0, 0), (2, 1, -1), (2, 1, 0), (9, 0, -2), (5, 3, -3),
    (12, 5, -7), (3, 2, -1), (14, 9, -2), (21, 8, -12),
]


def box_d_vectors(f, x, bound):
    """All d in D with x·d <= bound, by brute force over a box around the majorant ellipsoid."""
    A = np.array(f.lattice.A, dtype=float)
    adj = np.array(f.lattice.adjA, dtype=np.int64)
    sign = 1 if f.lattice.detA > 0 else -1
    xf = np.array(x, dtype=float)
    N = -(xf @ A @ xf)
    Q = np.linalg.inv(A) + 2 * np.outer(xf, xf) / N
    inv = np.linalg.inv(Q)
    radius = [int(np.floor(np.sqrt(2 * bound ** 2 / N * inv[i, i]))) + 1 for i in range(len(x))]
    ranges = [np.arange(-r, r + 1, dtype=np.int64) for r in radius]
    grid = np.array(np.meshgrid(*ranges, indexing="ij")).reshape(len(x), -1).T
    q = sign * np.einsum("ij,jk,ik->i", grid, adj, grid)
    pairing = grid @ np.array(x, dtype=np.int64)
    side = grid @ np.array(f.anchor1, dtype=np.int64)
    keep = (q <= 0) & (side > 0) & (pairing > 0) & (pairing <= bound)
    return {(tuple(int(a) for a in d), int(p)) for d, p in zip(grid[keep], pairing[keep])}


def test_gram_lattice_rejects_bad_input():
    with pytest.raises(AsymmetricMatrixError):
        GramLattice.from_matrix([[1, 2], [3, 4]])
    with pytest.raises(SingularError):
        GramLattice.from_matrix([[1, 1], [1, 1]])
    with pytest.raises(SignatureError):
        GramLattice.from_matrix(np.eye(3, dtype=int).tolist())
    with pytest.raises(SignatureError):
        GramLattice.from_matrix([[-1, 0, 0], [0, -1, 0], [0, 0, 1]])
    with pytest.raises(SignatureError):
        GramLattice.from_matrix([[-1]])


def test_frame_anchor_uses_negative_diagonal():
    f = make_frame(A)
    assert f.anchor1 == [1, 0, 0]
    assert f.anchor2 == [1, 3, 1]


def test_frame_anchor_without_negative_diagonal():
    f = make_frame([[0, 1], [1, 0]])
    assert in_V1(f, f.anchor1) == Membership.INTERIOR


def test_membership_in_V1():
    f = make_frame(H3)
    assert in_V1(f, [1, 0, 0]) == Membership.INTERIOR
    assert in_V1(f, [1, 1, 0]) == Membership.BOUNDARY
    assert in_V1(f, [-1, 0, 0]) == Membership.OUTSIDE
    assert in_V1(f, [0, 1, 0]) == Membership.OUTSIDE


def test_membership_in_V2():
    f = make_frame(H3)
    assert in_V2(f, [1, 0, 0]) == Membership.INTERIOR
    assert in_V2(f, [1, 1, 0]) == Membership.BOUNDARY
    assert in_V2(f, [-1, 0, 0]) == Membership.OUTSIDE


def test_minimal_vectors_of_h2():
    data = minimal_vectors(make_frame(H2), [1, 0])
    assert data.minimum == 1
    assert data.minvecs == [[1, -1], [1, 0], [1, 1]]
    assert data.rank_of_span == 2
    assert data.norm == 1


def test_minimal_vectors_of_h3():
    data = minimal_vectors(make_frame(H3), [1, 0, 0])
    assert data.minimum == 1
    assert data.minvecs == [[1, -1, 0], [1, 0, -1], [1, 0, 0], [1, 0, 1], [1, 1, 0]]
    assert data.rank_of_span == 3


def test_d_short_vectors_small_bounds():
    f = make_frame(H2)
    assert d_short_vectors(f, [1, 0], 0) == []
    assert [d for d, _ in d_short_vectors(f, [1, 0], 1)] == [[1, -1], [1, 0], [1, 1]]


def test_known_points_are_perfect():
    f = make_frame(A)
    for x in KNOWN_PERFECT_POINTS:
        assert minimal_vectors(f, x).rank_of_span == 3


def test_minimal_vectors_require_interior_point():
    f = make_frame(H3)
    with pytest.raises(PreconditionError):
        minimal_vectors(f, [0, 1, 0])


def test_minimal_vectors_match_box_oracle():
    f = make_frame(A)
    for x in KNOWN_PERFECT_POINTS[:4]:
        data = minimal_vectors(f, x)
        m = data.minimum
        oracle = box_d_vectors(f, x, m)
        assert {p for _, p in oracle} == {m}
        assert sorted(list(d) for d, _ in oracle) == data.minvecs


def check_against_box_oracle(rng, count, bound):
    for _ in range(count):
        f = make_frame(random_hyperbolic(rng, 3, bound))
        x = f.anchor1
        data = minimal_vectors(f, x)
        bound = data.minimum + 1
        found = {(tuple(d), k) for d, k in d_short_vectors(f, x, bound)}
        assert found == box_d_vectors(f, x, bound)


def test_random_lattices_match_box_oracle():
    check_against_box_oracle(np.random.default_rng(3), 12, 6)


@pytest.mark.slow
def test_many_random_lattices_match_box_oracle():
    check_against_box_oracle(np.random.default_rng(4), 50, 20)


def test_enclosed_vectors_agree_with_d_short_vectors():
    f = make_frame(A)
    for x in KNOWN_PERFECT_POINTS[:3]:
        m = minimal_vectors(f, x).minimum
        assert enclosed_d_vectors(f, x, m + 2) == d_short_vectors(f, x, m + 2)


def test_enclosed_vectors_at_rational_point():
    f = make_frame(H3)
    y = [Fraction(3, 2), Fraction(1, 2), 0]
    found = enclosed_d_vectors(f, y, 1)
    for d, p in found:
        assert p == sum(a * b for a, b in zip(y, d))
        assert 0 < p <= 1
        assert in_V2(f, d) != Membership.OUTSIDE
    assert ([1, -1, 0], 1) in found
    assert enclosed_d_vectors(f, y, 0) == []


def test_d_short_vectors_require_interior_point_even_for_empty_bound():
    f = make_frame(H3)
    with pytest.raises(PreconditionError):
        d_short_vectors(f, [0, 1, 0], 0)
    with pytest.raises(PreconditionError):
        d_short_vectors(f, [-1, 0, 0], -3)


def test_frame_anchor_is_shortened():
    # diag(-1, 1, 1) in a skewed basis; the diagonalisation row has norm 54
    f = make_frame([[73, 26, 7], [26, 10, 3], [7, 3, 1]])
    x = f.anchor1
    assert in_V1(f, x) == Membership.INTERIOR
    assert content(x) == 1
    assert 0 < f.lattice.norm(x) < 54
    assert f.anchor2 == [-a for a in vec_mat(x, f.lattice.A)]


def test_scaling_a_point_scales_the_minimum():
    f = make_frame(A)
    for x in KNOWN_PERFECT_POINTS[:5]:
        data = minimal_vectors(f, x)
        for c in (2, 3):
            scaled = minimal_vectors(f, [c * a for a in x])
            assert scaled.minimum == c * data.minimum
            assert scaled.minvecs == data.minvecs


def test_dual_of_a_cone_point_lies_in_V2():
    rng = np.random.default_rng(8)
    for _ in range(30):
        f = make_frame(random_hyperbolic(rng, int(rng.integers(2, 5)), 9))
        for _ in range(5):
            x = [int(a) for a in rng.integers(-12, 13, size=f.n)]
            if in_V1(f, x) != Membership.INTERIOR:
                continue
            assert in_V2(f, [-a for a in vec_mat(x, f.lattice.A)]) == Membership.INTERIOR
        assert in_V2(f, f.anchor2) == Membership.INTERIOR
