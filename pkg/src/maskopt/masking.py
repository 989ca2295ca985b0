"""Phase one: pairwise Gaussian noise exchange and zero-sum masks.

Every adjacent ordered pair ``i -> j`` carries a vector ``r[i->j]`` drawn from
N(0, sigma^2 I_m). Agent ``i`` masks its affine coefficient with

    a_i = sum_{j in N(i)} (r[j->i] - r[i->j])

and the masks of all agents sum to zero because each edge contributes the same
difference once with each sign.

Sampling is counter-based: entry ``k`` of the canonical draw order (edge index
then direction, ``i->j`` before ``j->i`` for ``i < j``) is produced from a fixed
Philox counter block keyed by the seed, so any single entry can be regenerated
on its own and a whole table can be drawn in one bulk call.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import InvalidArgument, InvalidEdge, InvalidSigma, InvalidTable, ShapeError
from .graph import Graph, incidence_matrix

Pair = tuple[int, int]

_WORDS_PER_BLOCK = 4
_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class NoiseTable:
    """Noise vectors for every ordered adjacent pair.

    ``seed`` is ``None`` for tables built from explicit values.
    """

    graph: Graph
    m: int
    sigma: float
    entries: Mapping[Pair, np.ndarray]
    seed: int | None = None

    def r(self, i: int, j: int) -> np.ndarray:
        try:
            return self.entries[(i, j)]
        except KeyError:
            raise InvalidEdge(f"no noise entry for {i}->{j}") from None

    def directional_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """``(forward, backward)`` arrays of shape ``(|E|, m)`` in canonical edge order.

        ``forward[k]`` is ``r[i->j]`` and ``backward[k]`` is ``r[j->i]`` for edge ``k = {i, j}``, ``i < j``.
        """
        edges = self.graph.edges
        fwd = np.array([self.entries[(i, j)] for i, j in edges]).reshape(len(edges), self.m)
        bwd = np.array([self.entries[(j, i)] for i, j in edges]).reshape(len(edges), self.m)
        return fwd, bwd


def _blocks_per_entry(m: int) -> int:
    words = 2 * ((m + 1) // 2)
    return -(-words // _WORDS_PER_BLOCK)


def _box_muller(raw: np.ndarray, m: int) -> np.ndarray:
    # raw: (..., 2 * ceil(m/2)) uint64 words -> (..., m) standard normals
    u = (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53
    u1 = 1.0 - u[..., 0::2]  # (0, 1], safe for log
    u2 = u[..., 1::2]
    radius = np.sqrt(-2.0 * np.log(u1))
    z = np.empty(u1.shape[:-1] + (2 * u1.shape[-1],))
    z[..., 0::2] = radius * np.cos(2.0 * np.pi * u2)
    z[..., 1::2] = radius * np.sin(2.0 * np.pi * u2)
    return z[..., :m]


def noise_entry(seed: int, entry: int, m: int) -> np.ndarray:
    """Standard-normal vector for draw-order position ``entry`` (unscaled by sigma)."""
    blocks = _blocks_per_entry(m)
    bitgen = np.random.Philox(key=seed & _SEED_MASK, counter=[entry * blocks, 0, 0, 0])
    raw = bitgen.random_raw(2 * ((m + 1) // 2))
    return _box_muller(raw, m)


def _standard_table(seed: int, count: int, m: int) -> np.ndarray:
    blocks = _blocks_per_entry(m)
    bitgen = np.random.Philox(key=seed & _SEED_MASK, counter=[0, 0, 0, 0])
    raw = bitgen.random_raw(count * blocks * _WORDS_PER_BLOCK)
    raw = raw.reshape(count, blocks * _WORDS_PER_BLOCK)[:, : 2 * ((m + 1) // 2)]
    return _box_muller(raw, m)


def sample_pairwise_noise(g: Graph, sigma: float, m: int, seed: int) -> NoiseTable:
    """Draw one N(0, sigma^2 I_m) vector per ordered adjacent pair, deterministically from ``seed``."""
    if m < 1:
        raise InvalidArgument(f"dimension must be >= 1, got {m}")
    if not sigma >= 0:
        raise InvalidSigma(f"sigma must be >= 0, got {sigma}")
    z = sigma * _standard_table(seed, 2 * len(g.edges), m)
    entries: dict[Pair, np.ndarray] = {}
    for k, (i, j) in enumerate(g.edges):
        entries[(i, j)] = z[2 * k]
        entries[(j, i)] = z[2 * k + 1]
    return NoiseTable(g, m, float(sigma), entries, seed)


def inject_noise(g: Graph, entries: Mapping[Pair, object], sigma: float = float("nan")) -> NoiseTable:
    """Wrap explicit noise values; keys must be exactly the ordered adjacent pairs."""
    expected = {(i, j) for i, j in g.edges} | {(j, i) for i, j in g.edges}
    given = {(int(i), int(j)) for i, j in entries}
    if len(given) != len(entries):
        raise InvalidTable("duplicate keys in noise table")
    missing, extra = expected - given, given - expected
    if missing or extra:
        parts = []
        if missing:
            parts.append("missing " + ", ".join(f"{i}->{j}" for i, j in sorted(missing)))
        if extra:
            parts.append("not an edge " + ", ".join(f"{i}->{j}" for i, j in sorted(extra)))
        raise InvalidTable("; ".join(parts))
    vectors = {(int(i), int(j)): np.atleast_1d(np.asarray(v, dtype=float)) for (i, j), v in entries.items()}
    dims = {v.shape for v in vectors.values()}
    if len(dims) > 1 or any(len(d) != 1 for d in dims):
        raise InvalidTable(f"noise vectors must share one 1-D shape, got {sorted(dims)}")
    m = next(iter(dims))[0] if dims else 1
    return NoiseTable(g, m, sigma, vectors, None)


def edge_difference(t: NoiseTable, e: Pair) -> np.ndarray:
    """``b_e = r[j->i] - r[i->j]`` for ``e = {i, j}``, ``i < j``."""
    i, j = sorted(e)
    if not t.graph.has_edge(i, j):
        raise InvalidEdge(f"{{{i}, {j}}} is not an edge")
    return t.r(j, i) - t.r(i, j)


def compute_masks(t: NoiseTable) -> np.ndarray:
    """Masks as an ``n x m`` array, row ``i - 1`` is ``a_i``.

    Computed as ``a^k = incidence @ b^k`` for every coordinate ``k``, which is
    the same per-node neighbour sum written as one matrix product.
    """
    fwd, bwd = t.directional_arrays()
    return incidence_matrix(t.graph) @ (bwd - fwd)


def apply_masks(alpha, masks) -> np.ndarray:
    """Effective affine coefficients, ``alpha + masks`` row by row."""
    alpha = np.asarray(alpha, dtype=float)
    masks = np.asarray(masks, dtype=float)
    if alpha.shape != masks.shape:
        raise ShapeError(f"coefficients {alpha.shape} vs masks {masks.shape}")
    return alpha + masks


def neighbor_sum_masks(g: Graph, forward: np.ndarray, backward: np.ndarray) -> np.ndarray:
    """Masks straight from the per-agent neighbour sums, batched over leading axes.

    ``forward``/``backward`` have shape ``(..., |E|, m)``. Returns ``(..., n, m)``.
    """
    out = np.zeros(forward.shape[:-2] + (g.n, forward.shape[-1]))
    for k, (i, j) in enumerate(g.edges):
        diff = backward[..., k, :] - forward[..., k, :]  # r[j->i] - r[i->j]
        out[..., i - 1, :] += diff
        out[..., j - 1, :] -= diff
    return out


def empirical_mask_covariance(g: Graph, sigma: float, trials: int = 100_000, seed: int = 0) -> np.ndarray:
    """Sample covariance of one mask coordinate ``a^k`` over independent protocol runs."""
    if trials < 1000:
        raise InvalidArgument(f"need at least 1000 trials, got {trials}")
    if not sigma >= 0:
        raise InvalidSigma(f"sigma must be >= 0, got {sigma}")
    rng = np.random.default_rng(seed)
    shape = (trials, len(g.edges), 1)
    fwd = sigma * rng.standard_normal(shape)
    bwd = sigma * rng.standard_normal(shape)
    a = neighbor_sum_masks(g, fwd, bwd)[..., 0]
    return np.cov(a, rowvar=False).reshape(g.n, g.n)
