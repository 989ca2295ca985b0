from itertools import combinations

import numpy as np
import pytest

from maskopt.cost_model import CostSet, QuadraticCost
from maskopt.graph import complete_graph, cycle_graph, new_graph, path_graph
from maskopt.masking import inject_noise

# r[i->j] values of the three-agent illustration
ILLUSTRATION_NOISE = {(1, 2): 0.1, (2, 1): 0.5, (2, 3): 0.7, (3, 2): 0.4, (3, 1): 0.3, (1, 3): 0.8}
ILLUSTRATION_X = (1.0, 2.0, 3.0)

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def triangle():
    return complete_graph(3)


@pytest.fixture
def path3():
    return path_graph(3)


@pytest.fixture
def cycle4():
    return cycle_graph(4)


@pytest.fixture
def illustration_table(triangle):
    return inject_noise(triangle, ILLUSTRATION_NOISE, sigma=1.0)


@pytest.fixture
def illustration_costs():
    return CostSet(tuple(QuadraticCost.from_vertex([x]) for x in ILLUSTRATION_X))


def all_graphs(n):
    """Every labelled simple graph on n nodes."""
    pairs = list(combinations(range(1, n + 1), 2))
    for mask in range(1 << len(pairs)):
        yield new_graph(n, [p for k, p in enumerate(pairs) if mask >> k & 1])


def random_graph(rng, n, p=None):
    p = rng.uniform(0.2, 0.9) if p is None else p
    return new_graph(n, [e for e in combinations(range(1, n + 1), 2) if rng.random() < p])


def to_networkx(g):
    import networkx as nx

    h = nx.Graph()
    h.add_nodes_from(g.nodes)
    h.add_edges_from(g.edges)
    return h


def brute_force_connected(nodes, edges):
    """Plain BFS over an explicit node/edge list; independent of maskopt.graph."""
    nodes = set(nodes)
    if not nodes:
        return True
    adj = {v: set() for v in nodes}
    for i, j in edges:
        if i in nodes and j in nodes:
            adj[i].add(j)
            adj[j].add(i)
    start = next(iter(nodes))
    seen, frontier = {start}, [start]
    while frontier:
        nxt = []
        for v in frontier:
            for w in adj[v] - seen:
                seen.add(w)
                nxt.append(w)
        frontier = nxt
    return seen == nodes


def random_symmetric(rng, n):
    a = rng.standard_normal((n, n))
    return (a + a.T) / 2


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
