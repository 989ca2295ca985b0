"""Communication graphs and the combinatorial machinery around them.

Nodes are labelled ``1..n`` everywhere in the public API. Matrices indexed by
node use row ``i - 1`` for node ``i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, NamedTuple

import numpy as np

from .errors import (
    EmptyHonestSet,
    InvalidArgument,
    InvalidEdge,
    InvalidNode,
    NotConnected,
    TooLarge,
)

Edge = tuple[int, int]

# Exhaustive subset searches are exponential in n.
MAX_EXHAUSTIVE_NODES = 20


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on nodes ``1..n``.

    Edges are stored once, as ``(min, max)`` pairs, in lexicographic order. That
    order is the canonical edge order used by the incidence matrix and by the
    noise sampler.
    """

    n: int
    edges: tuple[Edge, ...]
    _neighbors: tuple[frozenset[int], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for i, j in self.edges:
            adj[i - 1].add(j)
            adj[j - 1].add(i)
        object.__setattr__(self, "_neighbors", tuple(frozenset(s) for s in adj))

    @property
    def nodes(self) -> range:
        return range(1, self.n + 1)

    def neighbors(self, i: int) -> frozenset[int]:
        return self._neighbors[i - 1]

    def degree(self, i: int) -> int:
        return len(self._neighbors[i - 1])

    def has_edge(self, i: int, j: int) -> bool:
        return 1 <= i <= self.n and j in self._neighbors[i - 1]

    @cached_property
    def edge_index(self) -> dict[Edge, int]:
        return {e: k for k, e in enumerate(self.edges)}


def new_graph(n: int, edges: Iterable[Iterable[int]] = ()) -> Graph:
    """Validate and canonicalize an edge list.

    Raises:
        InvalidNode: an endpoint lies outside ``1..n`` (or ``n < 1``).
        InvalidEdge: a self-loop or a repeated edge (in either orientation).
    """
    if n < 1:
        raise InvalidNode(f"graph needs at least one node, got n={n}")
    seen: set[Edge] = set()
    for pair in edges:
        i, j = (int(v) for v in pair)
        for v in (i, j):
            if not 1 <= v <= n:
                raise InvalidNode(f"node {v} outside 1..{n}")
        if i == j:
            raise InvalidEdge(f"self-loop at node {i}")
        e = (min(i, j), max(i, j))
        if e in seen:
            raise InvalidEdge(f"duplicate edge {{{e[0]}, {e[1]}}}")
        seen.add(e)
    return Graph(n, tuple(sorted(seen)))


def complete_graph(n: int) -> Graph:
    return new_graph(n, combinations(range(1, n + 1), 2))


def path_graph(n: int) -> Graph:
    return new_graph(n, [(i, i + 1) for i in range(1, n)])


def cycle_graph(n: int) -> Graph:
    return new_graph(n, [(i, i % n + 1) for i in range(1, n + 1)])


def incidence_matrix(g: Graph) -> np.ndarray:
    """Oriented incidence matrix, ``n x |E|``: +1 at the smaller endpoint, -1 at the larger."""
    nabla = np.zeros((g.n, len(g.edges)))
    for k, (i, j) in enumerate(g.edges):
        nabla[i - 1, k] = 1.0
        nabla[j - 1, k] = -1.0
    return nabla


def laplacian(g: Graph) -> np.ndarray:
    lap = np.zeros((g.n, g.n))
    for i, j in g.edges:
        lap[i - 1, j - 1] = lap[j - 1, i - 1] = -1.0
        lap[i - 1, i - 1] += 1.0
        lap[j - 1, j - 1] += 1.0
    return lap


def _components_within(g: Graph, keep: frozenset[int]) -> list[list[int]]:
    parts = []
    unseen = set(keep)
    for start in sorted(keep):
        if start not in unseen:
            continue
        unseen.discard(start)
        part, stack = [start], [start]
        while stack:
            for j in g.neighbors(stack.pop()):
                if j in unseen:
                    unseen.discard(j)
                    part.append(j)
                    stack.append(j)
        parts.append(sorted(part))
    return parts


def connected_components(g: Graph) -> list[list[int]]:
    """Partition of the nodes into connected components, each sorted, ordered by smallest member."""
    return _components_within(g, frozenset(g.nodes))


def is_connected(g: Graph) -> bool:
    return len(connected_components(g)) == 1


class InducedGraph(NamedTuple):
    """A relabelled induced subgraph: node ``k`` of ``graph`` is ``nodes[k - 1]`` of the parent."""

    graph: Graph
    nodes: tuple[int, ...]


def induced_subgraph(g: Graph, keep: Iterable[int]) -> InducedGraph:
    kept = tuple(sorted(set(keep)))
    for v in kept:
        if not 1 <= v <= g.n:
            raise InvalidNode(f"node {v} outside 1..{g.n}")
    relabel = {v: k + 1 for k, v in enumerate(kept)}
    edges = [(relabel[i], relabel[j]) for i, j in g.edges if i in relabel and j in relabel]
    return InducedGraph(Graph(len(kept), tuple(sorted(edges))), kept)


def induced_honest_graph(g: Graph, corrupted: Iterable[int]) -> InducedGraph:
    """Subgraph on the honest nodes, keeping only edges between two honest agents."""
    bad = set(corrupted)
    for v in bad:
        if not 1 <= v <= g.n:
            raise InvalidNode(f"node {v} outside 1..{g.n}")
    honest = [v for v in g.nodes if v not in bad]
    if not honest:
        raise EmptyHonestSet("every node is corrupted")
    return induced_subgraph(g, honest)


def is_vertex_cut(g: Graph, s: Iterable[int]) -> bool:
    """True iff removing ``s`` leaves a disconnected graph."""
    removed = frozenset(s)
    for v in removed:
        if not 1 <= v <= g.n:
            raise InvalidNode(f"node {v} outside 1..{g.n}")
    rest = frozenset(g.nodes) - removed
    if not rest:
        raise InvalidArgument("cannot remove every node")
    return len(_components_within(g, rest)) > 1


def vertex_connectivity(g: Graph) -> int:
    """Size of a smallest vertex cut, found by trying subsets in increasing size.

    Complete graphs have no vertex cut at all; for them ``n - 1`` is returned.
    """
    if g.n < 2:
        raise InvalidArgument("vertex connectivity needs at least two nodes")
    if not is_connected(g):
        raise NotConnected("graph is disconnected")
    if g.n > MAX_EXHAUSTIVE_NODES:
        raise TooLarge(f"exhaustive search limited to n <= {MAX_EXHAUSTIVE_NODES}")
    for k in range(1, g.n - 1):
        for s in combinations(g.nodes, k):
            if is_vertex_cut(g, s):
                return k
    return g.n - 1


def vertex_expansion(g: Graph) -> float:
    """min over nonempty S with |S| <= n/2 of |N(S) \\ S| / |S|, by exhaustive search."""
    n = g.n
    if n < 2:
        raise InvalidArgument("vertex expansion needs at least two nodes")
    if n > MAX_EXHAUSTIVE_NODES:
        raise TooLarge(f"exhaustive search limited to n <= {MAX_EXHAUSTIVE_NODES}")
    nbr_mask = [sum(1 << (j - 1) for j in g.neighbors(i)) for i in g.nodes]
    best = float("inf")
    for mask in range(1, 1 << n):
        size = mask.bit_count()
        if 2 * size > n:
            continue
        boundary = 0
        bits, i = mask, 0
        while bits:
            if bits & 1:
                boundary |= nbr_mask[i]
            bits >>= 1
            i += 1
        ratio = (boundary & ~mask).bit_count() / size
        if ratio < best:
            best = ratio
    return best
