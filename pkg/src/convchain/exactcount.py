"""Exact chain counting by dynamic programming, with a brute-force oracle.

N(n1, n2, N) is the number of convex chains from (0,0) to (n1, n2) using
exactly N distinct directions.  The DP walks the direction set once and
convolves each direction's multiplicity choices into an (a, b, N) table of
arbitrary-precision integers; a chain is a set of (direction, multiplicity)
pairs, so the direction order is irrelevant to correctness.

count_bruteforce re-derives the same table by depth-first enumeration of all
multiplicity assignments and shares no recursion logic with the DP; it is the
independent oracle the DP is checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

from .errors import BudgetError, DomainError
from .chain import VertexMap
from .lattice import Direction, enumerate_directions

DEFAULT_BUDGET = 60
BRUTEFORCE_BUDGET = 16


@dataclass(frozen=True)
class CountTable:
    """counts[N] = exact number of chains from (0,0) to (n1,n2) with N vertices."""

    n1: int
    n2: int
    counts: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def max_vertices(self) -> int:
        for n in range(len(self.counts) - 1, -1, -1):
            if self.counts[n]:
                return n
        return 0

    def as_dict(self) -> dict[int, int]:
        return {n: c for n, c in enumerate(self.counts) if c or n == 0}


def _usable_directions(n1: int, n2: int) -> list[Direction]:
    if n1 + n2 == 0:
        return []
    return [d for d in enumerate_directions(n1 + n2) if d.x1 <= n1 and d.x2 <= n2]


def _vertex_upper_bound(n1: int, n2: int) -> int:
    # Greedy: the K cheapest distinct directions (by coordinate sum) must fit
    # in the total budget n1+n2, which bounds any chain's support size.
    sums = sorted(d.coord_sum for d in _usable_directions(n1, n2))
    acc = 0
    bound = 0
    for s in sums:
        acc += s
        if acc > n1 + n2:
            break
        bound += 1
    return bound


def count_exact(n1: int, n2: int, budget: int = DEFAULT_BUDGET) -> CountTable:
    """Exact CountTable for endpoint (n1, n2) by direction-wise DP.

    The direction loop is outermost; per direction the (a, b, N) table is
    updated with multiplicities j >= 1 against the pre-update table, which is
    exactly "use this direction with multiplicity 0 or j".
    """
    if n1 < 0 or n2 < 0:
        raise DomainError("endpoint coordinates must be nonnegative")
    if n1 + n2 > budget:
        raise BudgetError(
            f"count_exact({n1},{n2}) exceeds budget n1+n2 <= {budget}; "
            "raise the budget explicitly if you accept the cost"
        )
    nmax = _vertex_upper_bound(n1, n2)
    # table[a][b][k], bigint counts
    table = [[[0] * (nmax + 1) for _ in range(n2 + 1)] for _ in range(n1 + 1)]
    table[0][0][0] = 1
    for d in _usable_directions(n1, n2):
        p, q = d.x1, d.x2
        prev = [[row[:] for row in plane] for plane in table]
        for a in range(p, n1 + 1):
            for b in range(q, n2 + 1):
                ta = table[a][b]
                j = 1
                while j * p <= a and j * q <= b:
                    src = prev[a - j * p][b - j * q]
                    for k in range(1, nmax + 1):
                        c = src[k - 1]
                        if c:
                            ta[k] += c
                    j += 1
        del prev
    return CountTable(n1, n2, tuple(table[n1][n2]))


def iter_vertex_maps(n1: int, n2: int, budget: int = BRUTEFORCE_BUDGET) -> Iterator[VertexMap]:
    """Depth-first enumeration of every multiplicity assignment reaching (n1, n2)."""
    if n1 < 0 or n2 < 0:
        raise DomainError("endpoint coordinates must be nonnegative")
    if n1 + n2 > budget:
        raise BudgetError(f"enumeration needs n1+n2 <= {budget}")
    dirs = _usable_directions(n1, n2)

    def rec(i: int, a: int, b: int, picked: list[tuple[Direction, int]]):
        if a == 0 and b == 0:
            yield VertexMap(dict(picked))
            return
        if i >= len(dirs):
            return
        d = dirs[i]
        yield from rec(i + 1, a, b, picked)
        j = 1
        while j * d.x1 <= a and j * d.x2 <= b:
            picked.append((d, j))
            yield from rec(i + 1, a - j * d.x1, b - j * d.x2, picked)
            picked.pop()
            j += 1

    yield from rec(0, n1, n2, [])


def count_bruteforce(n1: int, n2: int, budget: int = BRUTEFORCE_BUDGET) -> CountTable:
    """Independent oracle: tally the exhaustive enumeration by support size."""
    nmax = _vertex_upper_bound(n1, n2)
    counts = [0] * (nmax + 1)
    for nu in iter_vertex_maps(n1, n2, budget):
        counts[len(nu)] += 1
    return CountTable(n1, n2, tuple(counts))


def max_vertices_exact(n: int, budget: int = DEFAULT_BUDGET) -> int:
    """Exact maximal vertex count over chains from (0,0) to (n,n)."""
    return count_exact(n, n, budget).max_vertices


def log_count_normalized(n: int, vertex_count: int, budget: int = DEFAULT_BUDGET) -> float:
    """ln N(n,n,N) / n^(2/3); -inf when the count is zero."""
    if n < 1:
        raise DomainError("n must be >= 1")
    table = count_exact(n, n, budget)
    c = table.counts[vertex_count] if 0 <= vertex_count < len(table.counts) else 0
    if c == 0:
        return float("-inf")
    return _log_bigint(c) / n ** (2.0 / 3.0)


def _log_bigint(value: int) -> float:
    if value.bit_length() <= 900:
        return math.log(value)
    shift = value.bit_length() - 64
    return math.log(value >> shift) + shift * math.log(2.0)
