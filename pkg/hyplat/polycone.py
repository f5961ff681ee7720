"""Extreme rays of {r : r·d^tr >= 0 for all d} by incremental double description."""
import logging
from dataclasses import dataclass, field
from typing import FrozenSet, List, Sequence

from hyplat.cone import ConeFrame, Membership, in_V1
from hyplat.errors import RankError
from hyplat.exact_linalg import dot, inverse, primitive, rank, transpose

logger = logging.getLogger(__name__)


@dataclass
class RayList:
    rays: List[List[int]]
    # indices of the input vectors each ray annihilates
    incidence: List[FrozenSet[int]] = field(default_factory=list)

    def __len__(self):
        return len(self.rays)

    def non_blind(self, f: ConeFrame) -> List[int]:
        return [i for i, r in enumerate(self.rays) if not is_blind(f, r)]


def _initial_basis(vectors, n):
    chosen = []
    for i, d in enumerate(vectors):
        if rank([vectors[j] for j in chosen] + [d]) > len(chosen):
            chosen.append(i)
            if len(chosen) == n:
                break
    return chosen


def extreme_rays(minvecs: Sequence[Sequence[int]], n: int) -> RayList:
    vectors = [[int(a) for a in d] for d in minvecs]
    if not vectors or rank(vectors) < n:
        raise RankError(f"constraints span rank {rank(vectors) if vectors else 0} < {n}")

    basis = _initial_basis(vectors, n)
    # columns of the inverse are dual to the chosen constraints
    dual = transpose(inverse([vectors[i] for i in basis]))
    rays = [primitive(r)[0] for r in dual]
    zeros = [frozenset(basis[:j] + basis[j + 1:]) for j in range(n)]
    processed = set(basis)

    for i, d in enumerate(vectors):
        if i in processed:
            continue
        values = [dot(r, d) for r in rays]
        positive = [j for j, v in enumerate(values) if v > 0]
        negative = [j for j, v in enumerate(values) if v < 0]
        new_rays, new_zeros = [], []
        for j, v in enumerate(values):
            if v > 0:
                new_rays.append(rays[j])
                new_zeros.append(zeros[j])
            elif v == 0:
                new_rays.append(rays[j])
                new_zeros.append(zeros[j] | {i})
        for p in positive:
            for q in negative:
                common = zeros[p] & zeros[q]
                if len(common) < n - 2:
                    continue
                common_rank = rank([vectors[c] for c in common]) if common else 0
                if common_rank != n - 2:
                    continue
                combined = [values[p] * a - values[q] * b for a, b in zip(rays[q], rays[p])]
                new_rays.append(primitive(combined)[0])
                new_zeros.append(common | {i})
        rays, zeros = new_rays, new_zeros
        processed.add(i)

    unique = sorted({tuple(r) for r in rays})
    incidence = [frozenset(j for j, d in enumerate(vectors) if dot(r, d) == 0) for r in unique]
    return RayList(rays=[list(r) for r in unique], incidence=incidence)


def is_blind(f: ConeFrame, r: Sequence[int]) -> bool:
    return in_V1(f, r) in (Membership.INTERIOR, Membership.BOUNDARY)
