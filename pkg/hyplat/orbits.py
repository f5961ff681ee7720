"""Breadth-first orbit enumeration with Schreier generators.

The action is a right action: ``act(point, g)`` is point·g and
``multiply(a, b)`` must compose so that act(act(p, a), b) = act(p, a·b).
"""
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Hashable, List, Optional, Sequence

from hyplat import config
from hyplat.errors import OrbitBudgetError

logger = logging.getLogger(__name__)


@dataclass
class Orbit:
    points: List[Any]
    transversal: List[Any]
    index: Dict[Hashable, int]
    stabilizer: List[Any] = field(default_factory=list)

    def __len__(self):
        return len(self.points)


def orbit(start, generators: Sequence, act: Callable, key: Callable, multiply: Callable,
          identity, budget: Optional[int] = None, target: Optional[Hashable] = None) -> Orbit:
    """Enumerate the orbit of `start`; stops early once a point with key `target` is reached."""
    budget = config.ORBIT_BUDGET if budget is None else budget
    points = [start]
    transversal = [identity]
    index = {key(start): 0}
    if target is not None and target in index:
        return Orbit(points, transversal, index)
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for g in generators:
            image = act(points[i], g)
            k = key(image)
            if k in index:
                continue
            index[k] = len(points)
            points.append(image)
            transversal.append(multiply(transversal[i], g))
            if len(points) > budget:
                raise OrbitBudgetError(f"orbit exceeded budget of {budget} points")
            if k == target:
                return Orbit(points, transversal, index)
            queue.append(index[k])
    return Orbit(points, transversal, index)


def orbit_stabilizer(start, generators: Sequence, act: Callable, key: Callable, multiply: Callable,
                     inverse: Callable, identity, element_key: Callable,
                     budget: Optional[int] = None) -> Orbit:
    """Orbit of `start` plus Schreier generators t_i·g·t_j^-1 of its stabilizer.

    Duplicates and the identity are dropped; order follows the BFS.
    """
    result = orbit(start, generators, act, key, multiply, identity, budget)
    seen = {element_key(identity)}
    stabilizer = []
    inverses = {}
    for i, point in enumerate(result.points):
        for g in generators:
            j = result.index[key(act(point, g))]
            if j not in inverses:
                inverses[j] = inverse(result.transversal[j])
            s = multiply(multiply(result.transversal[i], g), inverses[j])
            k = element_key(s)
            if k not in seen:
                seen.add(k)
                stabilizer.append(s)
    result.stabilizer = stabilizer
    logger.debug(f"orbit of size {len(result.points)}, {len(stabilizer)} Schreier generators")
    return result
