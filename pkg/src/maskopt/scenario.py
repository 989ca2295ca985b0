"""Scenario files: one TOML document binds a graph, costs, noise and adversary to a run.

Schema (all numbers decimal)::

    name = "illustration"          # optional
    m = 1                          # decision-variable dimension
    sigma = 1.0                    # noise scale, >= 0
    seed = 0                       # 64-bit sampling seed

    [graph]
    n = 3
    edges = [[1, 2], [1, 3], [2, 3]]

    [[costs]]                      # exactly n entries, agent order
    Q = [2.0]                      # upper triangle of Q, row-major, m(m+1)/2 values
    alpha = [-2.0]                 # m values
    c = 1.0                        # optional, default 0

    [adversary]
    corrupted = [3]                # optional, default []

    [optimizer]                    # every key optional
    method = "tracking"            # "dgd" | "tracking"
    step0 = 0.1
    decay = "sqrt"                 # "sqrt" | "constant" (dgd only)
    max_iters = 10000
    tol = 1e-6

    [noise]                        # optional; replaces sampling
    "1->2" = [0.1]                 # one m-vector per ordered adjacent pair

    [kl]                           # optional; needed by ``maskopt kl``
    alpha_prime = [[-2.0], [-4.0], [-6.0]]   # n rows of m values
    trials = 100000
    seed = 1
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .cost_model import CostSet, QuadraticCost, require_positive_definite
from .errors import MaskoptError, ScenarioError
from .graph import Graph, is_connected, new_graph
from .masking import NoiseTable, inject_noise
from .optimizer import OptimizerParams
from .privacy import AdversarySpec


@dataclass(frozen=True)
class Scenario:
    name: str
    graph: Graph
    m: int
    sigma: float
    seed: int
    costs: CostSet
    adversary: AdversarySpec
    optimizer: OptimizerParams
    noise: dict | None = None
    alpha_prime: np.ndarray | None = None
    kl_trials: int = 100_000
    kl_seed: int = 1

    def noise_table(self) -> NoiseTable | None:
        if self.noise is None:
            return None
        return inject_noise(self.graph, self.noise, self.sigma)

    def with_sigma(self, sigma: float) -> "Scenario":
        """Same scenario at another noise scale; injected noise is dropped in favour of sampling."""
        return replace(self, sigma=float(sigma), noise=None)


def upper_to_full(values, m: int) -> np.ndarray:
    q = np.zeros((m, m))
    q[np.triu_indices(m)] = values
    return q + np.triu(q, 1).T


def full_to_upper(q) -> list[float]:
    q = np.asarray(q, dtype=float)
    return [float(v) for v in q[np.triu_indices(q.shape[0])]]


class _Collector:
    def __init__(self):
        self.violations: list[tuple[str, str, str]] = []

    def add(self, path: str, code: str, msg: str) -> None:
        self.violations.append((path, code, msg))


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _number_list(v) -> bool:
    return isinstance(v, list) and all(_is_number(x) for x in v)


def _parse_pair(key: str) -> tuple[int, int] | None:
    parts = key.replace(" ", "").split("->")
    if len(parts) != 2 or not all(p.isdigit() for p in parts):
        return None
    return int(parts[0]), int(parts[1])


def scenario_from_dict(data: dict) -> Scenario:
    """Validate a parsed scenario document, reporting every violation found."""
    bad = _Collector()

    m = data.get("m")
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        bad.add("m", "InvalidArgument", f"expected integer >= 1, got {m!r}")
        m = None

    sigma = data.get("sigma")
    if not _is_number(sigma):
        bad.add("sigma", "InvalidSigma", f"expected a number, got {sigma!r}")
        sigma = None
    elif not sigma >= 0:
        bad.add("sigma", "InvalidSigma", f"sigma must be >= 0, got {sigma}")
        sigma = None

    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64:
        bad.add("seed", "InvalidArgument", f"expected a 64-bit non-negative integer, got {seed!r}")
        seed = 0

    graph = None
    gdata = data.get("graph")
    if not isinstance(gdata, dict):
        bad.add("graph", "InvalidArgument", "missing [graph] table")
    else:
        n = gdata.get("n")
        edges = gdata.get("edges", [])
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            bad.add("graph.n", "InvalidNode", f"expected integer >= 1, got {n!r}")
        elif not isinstance(edges, list):
            bad.add("graph.edges", "InvalidEdge", "expected a list of [i, j] pairs")
        else:
            edge_ok = True
            for k, e in enumerate(edges):
                try:
                    if not (isinstance(e, list) and len(e) == 2 and all(isinstance(v, int) for v in e)):
                        raise MaskoptError("expected an [i, j] integer pair")
                    new_graph(n, [e])
                except MaskoptError as exc:
                    bad.add(f"graph.edges[{k}]", type(exc).__name__, str(exc))
                    edge_ok = False
            if edge_ok:
                try:
                    graph = new_graph(n, edges)
                except MaskoptError as exc:
                    bad.add("graph.edges", type(exc).__name__, str(exc))
            if graph is not None and not is_connected(graph):
                bad.add("graph", "NotConnected", "communication graph must be connected")

    costs = None
    cdata = data.get("costs")
    n_agents = graph.n if graph is not None else None
    if not isinstance(cdata, list) or not cdata:
        bad.add("costs", "InvalidArgument", "missing [[costs]] entries")
    elif n_agents is not None and len(cdata) != n_agents:
        bad.add("costs", "ShapeError", f"{len(cdata)} cost entries for {n_agents} agents")
    elif m is not None:
        parsed = []
        for k, entry in enumerate(cdata):
            where = f"costs[{k}]"
            q, alpha, c = entry.get("Q"), entry.get("alpha"), entry.get("c", 0.0)
            ok = True
            if not _number_list(q) or len(q) != m * (m + 1) // 2:
                bad.add(f"{where}.Q", "ShapeError", f"expected {m * (m + 1) // 2} numbers (upper triangle)")
                ok = False
            if not _number_list(alpha) or len(alpha) != m:
                bad.add(f"{where}.alpha", "ShapeError", f"expected {m} numbers")
                ok = False
            if not _is_number(c):
                bad.add(f"{where}.c", "InvalidArgument", f"expected a number, got {c!r}")
                ok = False
            if ok:
                parsed.append(QuadraticCost(upper_to_full(q, m), alpha, c))
        if len(parsed) == len(cdata):
            costs = CostSet(tuple(parsed))
            try:
                require_positive_definite(costs.aggregate().Q)
            except MaskoptError as exc:
                bad.add("costs", type(exc).__name__, str(exc))

    adversary = None
    corrupted = data.get("adversary", {}).get("corrupted", [])
    if not isinstance(corrupted, list) or not all(isinstance(v, int) for v in corrupted):
        bad.add("adversary.corrupted", "InvalidNode", "expected a list of node indices")
    elif len(set(corrupted)) != len(corrupted):
        bad.add("adversary.corrupted", "InvalidNode", "repeated node")
    elif graph is not None:
        try:
            adversary = AdversarySpec.of(graph, corrupted)
        except MaskoptError as exc:
            bad.add("adversary.corrupted", type(exc).__name__, str(exc))

    optimizer = None
    odata = data.get("optimizer", {})
    try:
        known = {"step0", "decay", "max_iters", "tol", "method"}
        unknown = set(odata) - known
        if unknown:
            raise MaskoptError(f"unknown keys {sorted(unknown)}")
        optimizer = OptimizerParams(**odata)
    except (MaskoptError, TypeError) as exc:
        bad.add("optimizer", "InvalidArgument", str(exc))

    noise = None
    ndata = data.get("noise")
    if ndata is not None and graph is not None and m is not None:
        entries = {}
        for key, vec in ndata.items():
            pair = _parse_pair(key)
            if pair is None:
                bad.add(f"noise.{key!r}", "InvalidTable", "keys look like \"i->j\"")
                continue
            vec = [vec] if _is_number(vec) else vec
            if not _number_list(vec) or len(vec) != m:
                bad.add(f"noise.{key!r}", "InvalidTable", f"expected {m} numbers")
                continue
            entries[pair] = [float(v) for v in vec]
        try:
            inject_noise(graph, entries)
            noise = entries
        except MaskoptError as exc:
            bad.add("noise", type(exc).__name__, str(exc))

    alpha_prime, kl_trials, kl_seed = None, 100_000, 1
    kdata = data.get("kl")
    if kdata is not None:
        ap = kdata.get("alpha_prime")
        if n_agents is not None and m is not None:
            if (
                not isinstance(ap, list)
                or len(ap) != n_agents
                or not all(_number_list(row) and len(row) == m for row in ap)
            ):
                bad.add("kl.alpha_prime", "ShapeError", f"expected {n_agents} rows of {m} numbers")
            else:
                alpha_prime = np.array(ap, dtype=float)
        kl_trials = kdata.get("trials", kl_trials)
        if not isinstance(kl_trials, int) or kl_trials < 10_000:
            bad.add("kl.trials", "InvalidArgument", "need an integer >= 10000")
        kl_seed = kdata.get("seed", kl_seed)

    if bad.violations:
        raise ScenarioError(bad.violations)
    return Scenario(
        name=str(data.get("name", "scenario")),
        graph=graph,
        m=m,
        sigma=float(sigma),
        seed=seed,
        costs=costs,
        adversary=adversary,
        optimizer=optimizer,
        noise=noise,
        alpha_prime=alpha_prime,
        kl_trials=kl_trials,
        kl_seed=kl_seed,
    )


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ScenarioError([(str(path), "IOError", str(exc))]) from exc
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError([(str(path), "ParseError", str(exc))]) from exc
    data.setdefault("name", path.stem)
    return scenario_from_dict(data)


def shipped_scenario(name: str) -> Path:
    """Path of a scenario bundled with the package, e.g. ``"illustration"``."""
    path = Path(__file__).parent / "scenarios" / f"{name}.toml"
    if not path.exists():
        raise FileNotFoundError(path)
    return path


def random_connected_graph(rng: np.random.Generator, n: int, extra_edge_prob: float = 0.3) -> Graph:
    """Random spanning tree plus independent extra edges; always connected."""
    order = rng.permutation(n) + 1
    edges = {tuple(sorted((int(order[k]), int(order[rng.integers(k)])))) for k in range(1, n)}
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if (i, j) not in edges and rng.random() < extra_edge_prob:
                edges.add((i, j))
    return new_graph(n, sorted(edges))


def random_scenario(
    seed: int,
    n: int | None = None,
    m: int | None = None,
    sigma: float = 1.0,
    indefinite_every: int = 3,
    optimizer: OptimizerParams | None = None,
) -> Scenario:
    """Small random scenario for tests: connected graph, quadratic costs with a PD aggregate.

    Every ``indefinite_every``-th agent gets a shifted, possibly indefinite Hessian;
    draws are repeated until the aggregate is positive definite.
    """
    rng = np.random.default_rng(seed)
    n = int(n or rng.integers(2, 11))
    m = int(m or rng.integers(1, 4))
    graph = random_connected_graph(rng, n)
    while True:
        costs = []
        for i in range(n):
            b = rng.standard_normal((m, m))
            q = b @ b.T / m + 0.2 * np.eye(m)
            if indefinite_every and i % indefinite_every == indefinite_every - 1:
                q -= 0.6 * np.eye(m)
            costs.append(QuadraticCost(q, 2.0 * rng.standard_normal(m), float(rng.normal())))
        cset = CostSet(tuple(costs))
        try:
            require_positive_definite(cset.aggregate().Q)
            break
        except MaskoptError:
            continue
    if optimizer is None:
        lmax = max(np.abs(np.linalg.eigvalsh(c.Q)).max() for c in cset)
        optimizer = OptimizerParams(step0=0.2 / lmax, method="tracking", max_iters=50_000, tol=1e-6)
    corrupted = [int(v) for v in rng.choice(np.arange(1, n + 1), size=int(rng.integers(0, n)), replace=False)]
    return Scenario(
        name=f"random-{seed}",
        graph=graph,
        m=m,
        sigma=float(sigma),
        seed=int(rng.integers(2**63)),
        costs=cset,
        adversary=AdversarySpec.of(graph, corrupted),
        optimizer=optimizer,
    )
