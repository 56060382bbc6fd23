"""Convex lattice chains and their multiplicity-function representation.

A convex chain from the origin is fully described by how many unit steps it
takes in each coprime direction: ordering the used directions by increasing
slope and walking them with their multiplicities reconstructs the vertex
list.  ``decode``/``encode`` realize the two sides of that bijection;
``stats`` evaluates the endpoint, vertex-count and length functionals the
ensembles are calibrated against.

Conventions: the vertex count N of a chain is the number of *distinct*
directions used (equivalently its number of sides), so [(0,0),(1,0),(1,1)]
has N = 2.  The empty chain (no steps) is valid, with endpoint (0,0), N = 0
and length 0.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .errors import DomainError
from .lattice import Direction, make_direction, slope_cross


@dataclass(frozen=True)
class VertexMap:
    """Finitely supported map Direction -> positive multiplicity."""

    entries: Mapping[Direction, int] = field(default_factory=dict)

    def __post_init__(self):
        clean: dict[Direction, int] = {}
        for d, m in self.entries.items():
            if not isinstance(d, Direction):
                d = make_direction(*d)
            elif not d.is_valid():
                raise DomainError(f"invalid direction {d}")
            m = int(m)
            if m < 0:
                raise DomainError(f"negative multiplicity {m} for {d}")
            if m > 0:
                clean[d] = m
        # Lexicographic key order makes iteration deterministic.
        object.__setattr__(self, "entries", dict(sorted(clean.items())))

    def __getitem__(self, d: Direction) -> int:
        return self.entries.get(d, 0)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Direction]:
        return iter(self.entries)

    def items(self):
        return self.entries.items()

    def support_in_slope_order(self) -> list[Direction]:
        key = functools.cmp_to_key(lambda a, b: -slope_cross(a, b))
        return sorted(self.entries, key=key)

    def to_json(self) -> str:
        return json.dumps(
            {f"{d.x1},{d.x2}": m for d, m in self.entries.items()}
        )

    @classmethod
    def from_json(cls, text: str) -> "VertexMap":
        raw = json.loads(text)
        entries = {}
        for key, m in raw.items():
            a, b = key.split(",")
            entries[make_direction(int(a), int(b))] = int(m)
        return cls(entries)


@dataclass(frozen=True)
class ConvexChain:
    """Ordered vertex list of a convex polygonal line starting at (0,0)."""

    vertices: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "vertices", tuple((int(x), int(y)) for x, y in self.vertices)
        )

    @property
    def endpoint(self) -> tuple[int, int]:
        return self.vertices[-1]

    def sides(self) -> list[tuple[int, int]]:
        v = self.vertices
        return [(v[i + 1][0] - v[i][0], v[i + 1][1] - v[i][1]) for i in range(len(v) - 1)]

    def validate(self) -> None:
        v = self.vertices
        if not v:
            raise DomainError("chain must contain at least the origin")
        if v[0] != (0, 0):
            raise DomainError("chain must start at (0,0)")
        prev_side: tuple[int, int] | None = None
        for dx, dy in self.sides():
            if dx < 0 or dy < 0 or (dx == 0 and dy == 0):
                raise DomainError("coordinates must be nondecreasing with nonzero sides")
            if prev_side is not None:
                # strict slope increase: cross product of consecutive sides
                if prev_side[0] * dy - prev_side[1] * dx <= 0:
                    raise DomainError("sides must appear in strictly increasing slope order")
            prev_side = (dx, dy)

    def to_csv(self) -> str:
        return "\n".join(f"{x},{y}" for x, y in self.vertices) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "ConvexChain":
        vertices = []
        for line in text.strip().splitlines():
            x, y = line.split(",")
            vertices.append((int(x), int(y)))
        return cls(tuple(vertices))


@dataclass(frozen=True)
class ChainStats:
    endpoint: tuple[int, int]
    vertex_count: int
    euclidean_length: float


def decode(nu: VertexMap) -> ConvexChain:
    """Chain whose consecutive sides are nu(x)*x in increasing slope order."""
    x, y = 0, 0
    vertices = [(0, 0)]
    for d in nu.support_in_slope_order():
        m = nu[d]
        x += m * d.x1
        y += m * d.x2
        vertices.append((x, y))
    return ConvexChain(tuple(vertices))


def encode(chain: ConvexChain) -> VertexMap:
    """Multiplicity function of a chain: each side (y1,y2) contributes
    gcd(y1,y2) to the direction (y1/g, y2/g).  Rejects non-convex input."""
    chain.validate()
    entries: dict[Direction, int] = {}
    for dx, dy in chain.sides():
        g = math.gcd(dx, dy)
        entries[Direction(dx // g, dy // g)] = g
    return VertexMap(entries)


def stats(nu: VertexMap) -> ChainStats:
    e1 = sum(d.x1 * m for d, m in nu.items())
    e2 = sum(d.x2 * m for d, m in nu.items())
    length = math.fsum(d.euclidean_length * m for d, m in nu.items())
    return ChainStats(endpoint=(e1, e2), vertex_count=len(nu), euclidean_length=length)


def vertex_maps_equal(a: VertexMap, b: VertexMap) -> bool:
    return a.entries == b.entries


def chain_from_sparse(
    x1s: Iterable[int], x2s: Iterable[int], mults: Iterable[int]
) -> ConvexChain:
    """Fast decode from parallel coordinate/multiplicity sequences (already
    coprime directions, any order).  Used by the samplers."""
    triples = sorted(
        ((int(a), int(b), int(m)) for a, b, m in zip(x1s, x2s, mults)),
        key=functools.cmp_to_key(
            lambda p, q: -(p[0] * q[1] - p[1] * q[0])
        ),
    )
    x = y = 0
    vertices = [(0, 0)]
    for a, b, m in triples:
        x += a * m
        y += b * m
        vertices.append((x, y))
    return ConvexChain(tuple(vertices))
