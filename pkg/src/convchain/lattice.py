"""The lattice of coprime directions.

Every side of a convex lattice chain is an integer multiple of a unique
*direction*: a pair of coprime nonnegative integers, with (1,0) and (0,1)
included and (0,0) excluded.  This module enumerates the direction set, its
truncations by coordinate sum, and the aggregate quantities (sum of elements,
cardinality) that control the maximal-vertex-count construction.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import DomainError


class Direction(NamedTuple):
    """A coprime lattice direction (x1, x2).

    Tuple ordering is lexicographic, which gives a deterministic iteration
    order when directions are used as map keys.
    """

    x1: int
    x2: int

    @property
    def coord_sum(self) -> int:
        return self.x1 + self.x2

    @property
    def euclidean_length(self) -> float:
        return math.hypot(self.x1, self.x2)

    def is_valid(self) -> bool:
        if self.x1 < 0 or self.x2 < 0:
            return False
        if self.x1 == 0 and self.x2 == 0:
            return False
        return math.gcd(self.x1, self.x2) == 1


def make_direction(x1: int, x2: int) -> Direction:
    d = Direction(int(x1), int(x2))
    if not d.is_valid():
        raise DomainError(f"({x1},{x2}) is not a coprime direction")
    return d


def slope_cross(a: Direction, b: Direction) -> int:
    """Exact sign comparison of slopes: positive iff slope(a) < slope(b).

    Uses the integer cross product a.x1*b.x2 - a.x2*b.x1, so the axis
    directions (slope 0 and infinity) compare without floating point.
    """
    return a.x1 * b.x2 - a.x2 * b.x1


def enumerate_directions(max_coord_sum: int) -> list[Direction]:
    """All directions with x1 + x2 <= max_coord_sum, in increasing slope order.

    (1,0) comes first and (0,1) last.  The enumeration walks the Stern-Brocot
    mediant tree: between two neighbours the mediant is inserted while its
    coordinate sum stays within the bound, which yields exactly the coprime
    pairs in exact slope order with no sorting step.
    """
    if max_coord_sum < 1:
        raise DomainError("max_coord_sum must be >= 1")
    first, last = Direction(1, 0), Direction(0, 1)
    out = [first]
    # In-order walk of the Stern-Brocot tree rooted at mediant((1,0),(0,1)).
    # Descendants of a mediant never have a smaller coordinate sum, so a
    # too-large mediant prunes its whole subtree.
    frames: list[tuple[Direction, Direction, bool]] = [(first, last, False)]
    while frames:
        a, b, expanded = frames.pop()
        med = Direction(a.x1 + b.x1, a.x2 + b.x2)
        if med.coord_sum > max_coord_sum:
            continue
        if expanded:
            out.append(med)
            frames.append((med, b, False))
        else:
            frames.append((a, b, True))
            frames.append((a, med, False))
    out.append(last)
    return out


def direction_density(n: int) -> float:
    """card{x in X : x1 <= n, x2 <= n} / (n+1)^2.

    Converges to 6/pi^2 ~ 0.6079 (the density of coprime pairs).
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    return _box_count(n) / float((n + 1) ** 2)


def _box_count(n: int) -> int:
    a = np.arange(n + 1)
    g = np.gcd.outer(a, a)
    return int(np.count_nonzero(g == 1))


class XnAggregate(NamedTuple):
    a_n: int
    cardinality: int


def xn_aggregate(n: int) -> XnAggregate:
    """Aggregates of X_n = X intersected with {x1 + x2 <= n}.

    a_n is the first coordinate of the element sum of X_n (the sum is
    symmetric, so both coordinates agree); cardinality is card(X_n).
    Asymptotically a_n ~ n^3/pi^2 and cardinality ~ 3 n^2/pi^2, and the
    chain using every direction of X_n once realizes the maximal vertex
    count over chains with endpoint (a_n, a_n).
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    x1, x2 = triangle_arrays(n)
    return XnAggregate(int(x1.sum()), int(x1.size))


@lru_cache(maxsize=64)
def _triangle_cache(max_coord_sum: int) -> tuple[np.ndarray, np.ndarray]:
    rows_x1 = []
    rows_x2 = []
    for m in range(1, max_coord_sum + 1):
        a = np.arange(0, m + 1)
        keep = np.gcd(a, m - a) == 1
        rows_x1.append(a[keep])
        rows_x2.append((m - a)[keep])
    x1 = np.concatenate(rows_x1)
    x2 = np.concatenate(rows_x2)
    x1.setflags(write=False)
    x2.setflags(write=False)
    return x1, x2


def triangle_arrays(max_coord_sum: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized X_n enumeration: coordinate arrays of all directions with
    x1 + x2 <= max_coord_sum, ordered by (coord sum, x1).

    Order differs from enumerate_directions; use this fast path only where
    the consumer is order-insensitive (sums) or fixes its own order.
    """
    if max_coord_sum < 1:
        raise DomainError("max_coord_sum must be >= 1")
    return _triangle_cache(int(max_coord_sum))
