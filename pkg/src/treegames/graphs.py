"""Simple undirected graphs on vertices 0..n-1.

The package plays games on edge sets of graphs and embeds trees into them, so
this module keeps the representation small and fast: adjacency sets for
iteration plus lazily-built integer bitmasks for neighborhood intersections
(``int.bit_count`` makes common-neighborhood counting cheap even at n=600).

Edges are always normalized to sorted tuples ``(u, v)`` with ``u < v``.
"""

from __future__ import annotations

import random
from typing import Iterable, Iterator, List, Optional, Sequence, Set, Tuple

from .errors import InvalidConfiguration

Edge = Tuple[int, int]


def norm_edge(u: int, v: int) -> Edge:
    """Return the canonical (sorted) form of an edge."""
    if u == v:
        raise InvalidConfiguration(f"loop edge ({u},{v}) not allowed")
    return (u, v) if u < v else (v, u)


class Graph:
    """Mutable simple graph with set-based adjacency and bitmask views."""

    __slots__ = ("n", "adj", "_masks", "_edge_count")

    def __init__(self, n: int, edges: Optional[Iterable[Sequence[int]]] = None):
        if n < 0:
            raise InvalidConfiguration("vertex count must be nonnegative")
        self.n = n
        self.adj: List[Set[int]] = [set() for _ in range(n)]
        self._masks: Optional[List[int]] = None
        self._edge_count = 0
        if edges is not None:
            for u, v in edges:
                self.add_edge(u, v)

    # -- construction -----------------------------------------------------

    def add_edge(self, u: int, v: int) -> None:
        u, v = norm_edge(u, v)
        if v >= self.n:
            raise InvalidConfiguration(f"edge ({u},{v}) outside vertex range")
        if v not in self.adj[u]:
            self.adj[u].add(v)
            self.adj[v].add(u)
            self._edge_count += 1
            self._masks = None

    def remove_edge(self, u: int, v: int) -> None:
        u, v = norm_edge(u, v)
        if v in self.adj[u]:
            self.adj[u].discard(v)
            self.adj[v].discard(u)
            self._edge_count -= 1
            self._masks = None

    @classmethod
    def complete(cls, n: int) -> "Graph":
        g = cls(n)
        for u in range(n):
            for v in range(u + 1, n):
                g.add_edge(u, v)
        return g

    @classmethod
    def complete_bipartite(cls, left: Sequence[int], right: Sequence[int]) -> "Graph":
        n = max(list(left) + list(right)) + 1
        g = cls(n)
        for u in left:
            for v in right:
                g.add_edge(u, v)
        return g

    @classmethod
    def random(cls, n: int, p: float, rng: random.Random) -> "Graph":
        g = cls(n)
        for u in range(n):
            for v in range(u + 1, n):
                if rng.random() < p:
                    g.add_edge(u, v)
        return g

    # -- queries -----------------------------------------------------------

    def has_edge(self, u: int, v: int) -> bool:
        u, v = norm_edge(u, v)
        return v in self.adj[u]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def neighbors(self, v: int) -> Set[int]:
        return self.adj[v]

    def edge_count(self) -> int:
        return self._edge_count

    def edges(self) -> Iterator[Edge]:
        for u in range(self.n):
            for v in self.adj[u]:
                if v > u:
                    yield (u, v)

    def sorted_edges(self) -> List[Edge]:
        return sorted(self.edges())

    # -- bitmask views -----------------------------------------------------

    def masks(self) -> List[int]:
        """Adjacency of each vertex as an integer bitmask (bit v = neighbor v)."""
        if self._masks is None:
            masks = []
            for v in range(self.n):
                m = 0
                for u in self.adj[v]:
                    m |= 1 << u
                masks.append(m)
            self._masks = masks
        return self._masks

    def mask_of(self, vertices: Iterable[int]) -> int:
        m = 0
        for v in vertices:
            m |= 1 << v
        return m

    def common_degree(self, u: int, v: int, within_mask: Optional[int] = None) -> int:
        """Number of common neighbors of u and v, optionally inside a vertex mask."""
        masks = self.masks()
        m = masks[u] & masks[v]
        if within_mask is not None:
            m &= within_mask
        return m.bit_count()

    def degree_into(self, v: int, vertices_mask: int) -> int:
        return (self.masks()[v] & vertices_mask).bit_count()

    # -- derived graphs ----------------------------------------------------

    def subgraph_edges(self, vertices: Iterable[int]) -> List[Edge]:
        vs = set(vertices)
        return [(u, v) for (u, v) in self.edges() if u in vs and v in vs]

    def copy(self) -> "Graph":
        return Graph(self.n, self.edges())

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.sorted_edges()]}

    @classmethod
    def from_dict(cls, data: dict) -> "Graph":
        return cls(int(data["n"]), data["edges"])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.adj == other.adj

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self._edge_count})"


def complete_graph_edges(n: int) -> List[Edge]:
    return [(u, v) for u in range(n) for v in range(u + 1, n)]


def bipartite_edges(left: Sequence[int], right: Sequence[int]) -> List[Edge]:
    return [norm_edge(u, v) for u in left for v in right]
